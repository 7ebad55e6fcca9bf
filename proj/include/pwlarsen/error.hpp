#pragma once
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace pwlarsen {

enum class ErrorKind {
    ZeroVarianceColumn,
    DimensionMismatch,
    NonFiniteInput,
    AlphaOutOfRange,
    TiedEntry,
    RankDeficientActiveSet,
    KnotIndexOutOfRange,
    NegativeEta,
    NotConverged,
    NotOrthonormal,
    NonpositiveSigma2,
    AlphaNotInGrid,
    Underdetermined,
    RankDeficient,
    InvalidReference,
    NotPositiveDefinite,
    CholeskyFailure,
    EmptySamples,
    InvalidArgument,
    ParseError,
    StandardizationError,
    DataFileMissing,
    ChecksumMismatch,
    TooManyFailures,
};

inline constexpr std::string_view to_string(ErrorKind k) noexcept
{
    switch (k) {
        case ErrorKind::ZeroVarianceColumn: return "ZeroVarianceColumn";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NonFiniteInput: return "NonFiniteInput";
        case ErrorKind::AlphaOutOfRange: return "AlphaOutOfRange";
        case ErrorKind::TiedEntry: return "TiedEntry";
        case ErrorKind::RankDeficientActiveSet: return "RankDeficientActiveSet";
        case ErrorKind::KnotIndexOutOfRange: return "KnotIndexOutOfRange";
        case ErrorKind::NegativeEta: return "NegativeEta";
        case ErrorKind::NotConverged: return "NotConverged";
        case ErrorKind::NotOrthonormal: return "NotOrthonormal";
        case ErrorKind::NonpositiveSigma2: return "NonpositiveSigma2";
        case ErrorKind::AlphaNotInGrid: return "AlphaNotInGrid";
        case ErrorKind::Underdetermined: return "Underdetermined";
        case ErrorKind::RankDeficient: return "RankDeficient";
        case ErrorKind::InvalidReference: return "InvalidReference";
        case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorKind::CholeskyFailure: return "CholeskyFailure";
        case ErrorKind::EmptySamples: return "EmptySamples";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::StandardizationError: return "StandardizationError";
        case ErrorKind::DataFileMissing: return "DataFileMissing";
        case ErrorKind::ChecksumMismatch: return "ChecksumMismatch";
        case ErrorKind::TooManyFailures: return "TooManyFailures";
    }
    return "Unknown";
}

/**
 * Base exception for every failure raised by the library.
 * The kind tag lets callers (the CLI in particular) map failures
 * to exit codes without string matching.
 */
class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(std::string(to_string(kind)) + ": " + msg),
          kind_(kind)
    {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised by the coordinate-descent oracle; keeps the last iterate.
class NotConvergedError : public Error
{
public:
    NotConvergedError(std::size_t max_iter, Eigen::VectorXd last, double kkt)
        : Error(ErrorKind::NotConverged,
                "no convergence after " + std::to_string(max_iter) +
                " sweeps (kkt residual " + std::to_string(kkt) + ")"),
          max_iter_(max_iter), last_(std::move(last)), kkt_(kkt)
    {}

    std::size_t max_iter() const noexcept { return max_iter_; }
    const Eigen::VectorXd& last_iterate() const noexcept { return last_; }
    double kkt_residual() const noexcept { return kkt_; }

private:
    std::size_t max_iter_;
    Eigen::VectorXd last_;
    double kkt_;
};

/// Raised by text readers; line is 1-based and counts the header.
class ParseError : public Error
{
public:
    ParseError(std::size_t line, const std::string& msg)
        : Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + msg),
          line_(line)
    {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg)
{
    throw Error(kind, msg);
}

inline void require(bool cond, ErrorKind kind, const std::string& msg)
{
    if (!cond) fail(kind, msg);
}

} // namespace detail
} // namespace pwlarsen
