#pragma once
// Counter-based random streams.
//
// Every variate consumed by the particle system is addressed by the tuple
// (master seed, replicate, unit id, step, slot) and produced by a stateless
// mix chain, so simulation output depends only on those labels -- never on
// thread scheduling, iteration order, or how many draws other units consumed.
// Unit ids are assigned deterministically (initial units in canonical atom
// order, offspring from a per-replicate counter), which is what makes whole
// trajectories reproducible bit-for-bit.

#include <cmath>
#include <cstdint>

namespace branchlab {

// splitmix64 finalizer; good avalanche, cheap enough for the hot loop
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// slot layout within one (replicate, unit, step) cell
enum : uint64_t {
    SLOT_BRANCH = 0,       // event uniform: death/birth thinning
    SLOT_NORMAL_BASE = 1,  // motion normals: dim j uses slots 1+2j, 2+2j
};

struct ReplicateRng {
    uint64_t base;  // mix of master seed and replicate index
    ReplicateRng(uint64_t master_seed, uint64_t replicate)
        : base(mix64(mix64(master_seed ^ 0x243f6a8885a308d3ULL) ^ replicate)) {}
};

// per-(unit, step) handle; one extra mix per drawn word
struct UnitStepRng {
    uint64_t h;
    UnitStepRng(const ReplicateRng& rep, uint64_t unit_id, uint64_t step)
        : h(mix64(mix64(rep.base ^ unit_id) ^ step)) {}

    uint64_t word(uint64_t slot) const { return mix64(h ^ slot); }

    // uniform on the open interval (0,1)
    double uniform(uint64_t slot) const {
        return (static_cast<double>(word(slot) >> 11) + 0.5) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; dim j consumes slots 1+2j and 2+2j
    double normal(int j) const {
        double u1 = uniform(SLOT_NORMAL_BASE + 2 * static_cast<uint64_t>(j));
        double u2 = uniform(SLOT_NORMAL_BASE + 2 * static_cast<uint64_t>(j) + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }
};

}  // namespace branchlab
