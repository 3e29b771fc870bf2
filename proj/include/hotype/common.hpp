#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hotype {

using cplx = std::complex<double>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};
class KindMismatch : public Error {
public:
    using Error::Error;
};
class IndexOutOfRange : public Error {
public:
    using Error::Error;
};
class DuplicatePoint : public Error {
public:
    using Error::Error;
};
class ResolutionError : public Error {
public:
    using Error::Error;
};
class UnsupportedFamily : public Error {
public:
    using Error::Error;
};
class DegenerateBall : public Error {
public:
    using Error::Error;
};
class SpaceMismatch : public Error {
public:
    using Error::Error;
};
class SchemaError : public Error {
public:
    using Error::Error;
};
class FormatError : public Error {
public:
    using Error::Error;
};

/// splitmix64 finalizer; used for seed derivation.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

/// FNV-1a over bytes.
std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t h);

/// Portable seeded stream: identical output on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next_u64();
    double uniform();                       // [0,1)
    double uniform(double a, double b);     // [a,b)
    double normal();                        // Box-Muller
    std::size_t below(std::size_t n);       // [0,n)

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Worker count from HOTYPE_WORKERS (default 1, at least 1).
std::size_t worker_count();

/// Runs fn(i) for i in [0,n) on worker_count() threads; fn must write only to slot i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Shortest round-trip decimal form, used by all text formats.
std::string fmt_double(double v);

}  // namespace hotype
