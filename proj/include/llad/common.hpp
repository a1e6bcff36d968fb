#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace llad {

// Error taxonomy shared by all modules. `user_error` maps to exit code 1,
// `internal_error` to exit code 2.
enum class ErrCode {
    Parse,
    UnboundVar,
    LinearityViolation,
    NonExponentialDuplication,
    TypeMismatch,
    ShapeMismatch,
    IllTyped,
    NotSafe,
    NotClosed,
    SortError,
    TangentLinearityViolation,
    NotPrimal,
    NotSortR,
    DegreeOverflow,
    FuelExhausted,
    Usage,
};

struct user_error : std::runtime_error {
    ErrCode code;
    user_error(ErrCode c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

struct internal_error : std::logic_error {
    explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

const char* errcode_name(ErrCode c);

// Numeral comparison used throughout the tests: absolute + relative slack.
inline bool num_close(double a, double b, double tol = 1e-9) {
    double d = a > b ? a - b : b - a;
    double mb = b < 0 ? -b : b;
    return d <= tol + tol * mb;
}

// Shortest float rendering that round-trips through strtod.
std::string fmt_double(double v);

// Splittable deterministic RNG (splitmix64 core).
struct Rng {
    uint64_t state;
    explicit Rng(uint64_t seed = 0x9e3779b97f4a7c15ull) : state(seed) {}
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // Independent stream; per-trial determinism does not depend on call order.
    Rng fork(uint64_t i) const {
        Rng r(state ^ (0xd1b54a32d192ed03ull * (i + 1)));
        r.next();
        return r;
    }
    double uniform(double lo, double hi) {
        double u = double(next() >> 11) * (1.0 / 9007199254740992.0);
        return lo + (hi - lo) * u;
    }
    int pick(int n) { return n <= 1 ? 0 : int(next() % uint64_t(n)); }
};

}  // namespace llad
