#pragma once

#include <cstdint>
#include <cmath>

namespace parocs {

/// Deterministic, platform-stable RNG (splitmix64 core).  Standard-library
/// distributions are implementation-defined, so the mappings to uniforms and
/// normals are done by hand to keep seeded outputs byte-identical.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    int below(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

    /// Independent child stream; used to give sweep samples stable seeds.
    Rng fork() { return Rng(next_u64()); }

private:
    std::uint64_t s_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace parocs
