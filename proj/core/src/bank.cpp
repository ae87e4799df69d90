#include "memshard/bank.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "memshard/errors.hpp"

namespace memshard {

MemoryBank make_bank(int timesteps, double eta) {
    if (timesteps < 1) {
        throw ConfigError("memory bank: timestep count must be >= 1");
    }
    if (!(eta > 0.0) || eta > 1.0) {
        throw ConfigError("memory bank: eta must be in (0, 1]");
    }
    MemoryBank bank;
    bank.losses.assign(static_cast<std::size_t>(timesteps), 0.0);
    bank.eta = eta;
    return bank;
}

void bank_update(MemoryBank& bank, int t_index, double raw_loss) {
    if (t_index < 0 || static_cast<std::size_t>(t_index) >= bank.losses.size()) {
        throw std::out_of_range("bank_update: timestep index out of range");
    }
    if (!std::isfinite(raw_loss) || raw_loss < 0.0) {
        throw NumericError("bank_update: loss must be finite and >= 0, got " +
                           std::to_string(raw_loss));
    }
    double& slot = bank.losses[static_cast<std::size_t>(t_index)];
    slot = bank.eta * slot + (1.0 - bank.eta) * raw_loss;
}

std::optional<double> loss_ratio(const MemoryBank& bank, int t_index,
                                 double raw_loss) {
    if (t_index < 0 || static_cast<std::size_t>(t_index) >= bank.losses.size()) {
        throw std::out_of_range("loss_ratio: timestep index out of range");
    }
    const double mean = bank.losses[static_cast<std::size_t>(t_index)];
    if (mean == 0.0) {
        return std::nullopt;  // not yet calibrated
    }
    return raw_loss / mean;
}

}  // namespace memshard
