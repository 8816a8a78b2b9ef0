#pragma once

// Binary encoding used for disk spill and for the stable partitioner hash.
// Fixed-width little-endian for arithmetic types (bit-exact for doubles),
// u32 length prefix for strings and sequences.

#include <cstdint>
#include <cstring>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>

#include "planrec/error.hpp"

namespace planrec::codec {

template <class T, class Enable = void>
struct Codec;

template <class T>
void encode(const T& value, std::string& out) {
    Codec<T>::encode(value, out);
}

template <class T>
T decode(std::string_view& in) {
    return Codec<T>::decode(in);
}

inline void take(std::string_view& in, void* dst, std::size_t n) {
    if (in.size() < n) throw SpillIOError("truncated spill record");
    std::memcpy(dst, in.data(), n);
    in.remove_prefix(n);
}

template <class T>
struct Codec<T, std::enable_if_t<std::is_arithmetic_v<T>>> {
    static void encode(const T& v, std::string& out) {
        char buf[sizeof(T)];
        std::memcpy(buf, &v, sizeof(T));
        out.append(buf, sizeof(T));
    }
    static T decode(std::string_view& in) {
        T v;
        take(in, &v, sizeof(T));
        return v;
    }
};

template <>
struct Codec<std::string> {
    static void encode(const std::string& s, std::string& out) {
        Codec<std::uint32_t>::encode(static_cast<std::uint32_t>(s.size()), out);
        out.append(s);
    }
    static std::string decode(std::string_view& in) {
        auto n = Codec<std::uint32_t>::decode(in);
        if (in.size() < n) throw SpillIOError("truncated spill record");
        std::string s(in.substr(0, n));
        in.remove_prefix(n);
        return s;
    }
};

template <class A, class B>
struct Codec<std::pair<A, B>> {
    static void encode(const std::pair<A, B>& p, std::string& out) {
        Codec<A>::encode(p.first, out);
        Codec<B>::encode(p.second, out);
    }
    static std::pair<A, B> decode(std::string_view& in) {
        A a = Codec<A>::decode(in);
        B b = Codec<B>::decode(in);
        return {std::move(a), std::move(b)};
    }
};

template <class... Ts>
struct Codec<std::tuple<Ts...>> {
    static void encode(const std::tuple<Ts...>& t, std::string& out) {
        std::apply([&](const auto&... xs) { (Codec<std::decay_t<decltype(xs)>>::encode(xs, out), ...); }, t);
    }
    static std::tuple<Ts...> decode(std::string_view& in) {
        // braced init guarantees left-to-right evaluation
        return std::tuple<Ts...>{Codec<Ts>::decode(in)...};
    }
};

template <class T>
struct Codec<std::vector<T>> {
    static void encode(const std::vector<T>& v, std::string& out) {
        Codec<std::uint32_t>::encode(static_cast<std::uint32_t>(v.size()), out);
        for (const auto& x : v) Codec<T>::encode(x, out);
    }
    static std::vector<T> decode(std::string_view& in) {
        auto n = Codec<std::uint32_t>::decode(in);
        std::vector<T> v;
        v.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) v.push_back(Codec<T>::decode(in));
        return v;
    }
};

template <class K, class V>
struct Codec<std::map<K, V>> {
    static void encode(const std::map<K, V>& m, std::string& out) {
        Codec<std::uint32_t>::encode(static_cast<std::uint32_t>(m.size()), out);
        for (const auto& [k, v] : m) {
            Codec<K>::encode(k, out);
            Codec<V>::encode(v, out);
        }
    }
    static std::map<K, V> decode(std::string_view& in) {
        auto n = Codec<std::uint32_t>::decode(in);
        std::map<K, V> m;
        for (std::uint32_t i = 0; i < n; ++i) {
            K k = Codec<K>::decode(in);
            m.emplace(std::move(k), Codec<V>::decode(in));
        }
        return m;
    }
};

/// FNV-1a over the encoded bytes, seeded.
inline std::uint64_t stable_hash(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = 14695981039346656037ULL ^ seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace planrec::codec
