#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace planrec {

/// Base class for every error raised by the library. The CLI maps these to
/// exit code 2 (data error).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t position, const std::string& message)
        : Error("parse error at " + std::to_string(position) + ": " + message),
          position_(position), message_(message) {}

    std::size_t position() const noexcept { return position_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t position_;
    std::string message_;
};

class UnsupportedStatement : public Error {
public:
    explicit UnsupportedStatement(const std::string& keyword)
        : Error("unsupported statement: " + keyword + " (only SELECT is accepted)") {}
};

class EmptyQuery : public Error {
public:
    explicit EmptyQuery(const std::string& query_id)
        : Error("query '" + query_id + "' produced no terms"), query_id_(query_id) {}
    const std::string& query_id() const noexcept { return query_id_; }

private:
    std::string query_id_;
};

/// A user map or reduce function threw. `job_index` is set when the failure
/// happened inside a chain.
class TaskError : public Error {
public:
    TaskError(std::string phase, std::size_t partition, std::string cause, long job_index = -1)
        : Error(describe(phase, partition, cause, job_index)),
          phase_(std::move(phase)), partition_(partition), cause_(std::move(cause)),
          job_index_(job_index) {}

    const std::string& phase() const noexcept { return phase_; }
    std::size_t partition() const noexcept { return partition_; }
    const std::string& cause() const noexcept { return cause_; }
    long job_index() const noexcept { return job_index_; }

    TaskError with_job_index(long index) const { return {phase_, partition_, cause_, index}; }

private:
    static std::string describe(const std::string& phase, std::size_t partition,
                                const std::string& cause, long job_index) {
        std::string s = phase + " task " + std::to_string(partition) + " failed: " + cause;
        if (job_index >= 0) s = "job " + std::to_string(job_index) + ": " + s;
        return s;
    }

    std::string phase_;
    std::size_t partition_;
    std::string cause_;
    long job_index_;
};

class SpillIOError : public Error {
public:
    using Error::Error;
};

class ZeroVector : public Error {
public:
    ZeroVector() : Error("cosine of a zero-norm vector is undefined") {}
};

class MissingPair : public Error {
public:
    MissingPair(std::size_t i, std::size_t j)
        : Error("similarity entry missing for pair (" + std::to_string(i) + ", " +
                std::to_string(j) + ")"),
          i_(i), j_(j) {}
    std::size_t i() const noexcept { return i_; }
    std::size_t j() const noexcept { return j_; }

private:
    std::size_t i_, j_;
};

class EmptyInput : public Error {
public:
    EmptyInput() : Error("clustering requires at least one point") {}
};

class InvalidParams : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class DuplicateId : public Error {
public:
    explicit DuplicateId(const std::string& id) : Error("duplicate query id '" + id + "'") {}
};

/// Malformed artifact or input file; `line` is 1-based, 0 when unknown.
class FormatError : public Error {
public:
    FormatError(const std::string& file, std::size_t line, const std::string& message)
        : Error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + message) {}
};

class ChecksumMismatch : public Error {
public:
    explicit ChecksumMismatch(const std::string& file)
        : Error("checksum mismatch for '" + file + "'") {}
};

class VersionMismatch : public Error {
public:
    VersionMismatch(int found, int supported)
        : Error("workspace format version " + std::to_string(found) +
                " is not readable (supported up to " + std::to_string(supported) + ")") {}
};

}  // namespace planrec
