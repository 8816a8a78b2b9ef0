#include "planrec/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "planrec/error.hpp"

namespace planrec {

void ClusteringParams::validate() const {
    if (!(eps > 0.0 && eps <= 1.0)) throw InvalidParams("eps must be in (0, 1], got " + std::to_string(eps));
    if (min_pts < 1) throw InvalidParams("min_pts must be at least 1");
}

std::size_t ClusterModel::cluster_count() const {
    ClusterLabel top = kNoise;
    for (auto l : labels) top = std::max(top, l);
    return static_cast<std::size_t>(top + 1);
}

std::vector<std::size_t> eps_neighborhood(const DistanceMatrix& m, std::size_t p, double eps) {
    std::vector<std::size_t> out;
    for (std::size_t q = 0; q < m.size(); ++q)
        if (q == p || m(p, q) <= eps) out.push_back(q);
    return out;
}

bool is_core(const DistanceMatrix& m, std::size_t p, const ClusteringParams& params) {
    return eps_neighborhood(m, p, params.eps).size() >= params.min_pts;
}

ClusterModel cluster(const DistanceMatrix& m, const ClusteringParams& params) {
    params.validate();
    const std::size_t n = m.size();
    if (n == 0) throw EmptyInput();

    constexpr ClusterLabel kUnvisited = -2;
    ClusterModel model{m.ids, std::vector<ClusterLabel>(n, kUnvisited), params};
    ClusterLabel next = 0;

    for (std::size_t p = 0; p < n; ++p) {
        if (model.labels[p] != kUnvisited) continue;
        auto seeds = eps_neighborhood(m, p, params.eps);
        if (seeds.size() < params.min_pts) {
            model.labels[p] = kNoise;  // may still become a border point later
            continue;
        }
        const ClusterLabel c = next++;
        model.labels[p] = c;
        std::deque<std::size_t> queue(seeds.begin(), seeds.end());
        while (!queue.empty()) {
            std::size_t q = queue.front();
            queue.pop_front();
            if (model.labels[q] == kNoise) model.labels[q] = c;
            if (model.labels[q] != kUnvisited) continue;
            model.labels[q] = c;
            auto reach = eps_neighborhood(m, q, params.eps);
            if (reach.size() >= params.min_pts) queue.insert(queue.end(), reach.begin(), reach.end());
        }
    }
    return model;
}

}  // namespace planrec
