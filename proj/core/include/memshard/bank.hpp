#pragma once

#include <optional>
#include <vector>

namespace memshard {

/// Per-timestep EMA of raw training losses. Entry i tracks sampled
/// timestep t = i + 1; entries start at 0 and stay 0 until first touched.
struct MemoryBank {
    std::vector<double> losses;
    double eta = 0.8;  // smoothing factor in (0, 1]
};

MemoryBank make_bank(int timesteps, double eta);

/// losses[t_index] <- eta * losses[t_index] + (1 - eta) * raw_loss.
void bank_update(MemoryBank& bank, int t_index, double raw_loss);

/// raw_loss / losses[t_index]; nullopt while the slot is still at its
/// initial 0 (not yet calibrated, callers must treat the sample as Keep).
std::optional<double> loss_ratio(const MemoryBank& bank, int t_index,
                                 double raw_loss);

}  // namespace memshard
