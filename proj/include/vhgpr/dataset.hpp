#pragma once

/**
 * @file dataset.hpp
 * @brief Stress-strain(-strain rate) record collections shared by the
 *        calibration, surrogate, and harness layers.
 */

#include <cstdint>
#include <cstring>
#include <vector>

#include "vhgpr/kinematics.hpp"
#include "vhgpr/materials.hpp"
#include "vhgpr/voigt.hpp"

namespace vhgpr {

/// One material-point observation: the kinematic state and the stress of a
/// single branch at that state.
struct StressRecord {
    DeformationState state;
    SymTensor3 stress;
};

/// A branch-tagged dataset. v_iso records carry nonzero Fdot; vol and h_iso
/// records are quasi-static (Fdot = 0).
struct BranchDataset {
    Branch branch = Branch::Vol;
    std::vector<StressRecord> records;

    std::size_t size() const { return records.size(); }
};

/// FNV-1a over the Voigt content of every record; used as dataset provenance
/// in serialized model envelopes.
inline std::uint64_t dataset_hash(const BranchDataset& data) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](double x) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(x));
        std::memcpy(&bits, &x, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    mix(static_cast<double>(data.branch == Branch::Vol ? 0 : (data.branch == Branch::HIso ? 1 : 2)));
    for (const auto& r : data.records) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) mix(r.state.F(i, j));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) mix(r.state.Fdot(i, j));
        for (int i = 0; i < 6; ++i) mix(r.stress[i]);
    }
    return h;
}

}  // namespace vhgpr
