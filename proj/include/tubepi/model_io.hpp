#pragma once

#include <string>

#include "tubepi/dense_net.hpp"
#include "tubepi/kernel_machine.hpp"

namespace tubepi {

// Versioned textual model files ("tubepi model v1"). Doubles are stored as
// 16-digit hex of their IEEE-754 bit pattern, so a round trip reproduces
// predictions bit-exactly. Unknown versions and truncated files are
// rejected with a DataError.

enum class ModelKind { KERNEL, NET };

struct LoadedModel {
    ModelKind kind = ModelKind::KERNEL;
    PIKernelModel kernel;
    DenseNet net;
    NetLossSpec net_loss; // the loss the net was fitted with
};

void save_model(const std::string& path, const PIKernelModel& model);
void save_model(const std::string& path, const DenseNet& net,
                const NetLossSpec& loss);

LoadedModel load_model(const std::string& path);

} // namespace tubepi
