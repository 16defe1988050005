#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vdpo/nn/autodiff.hpp"

namespace vdpo::nn {

struct CheckpointTensor {
    std::string name;
    Matrix value;
    Matrix adam_m;
    Matrix adam_v;
};

struct Checkpoint {
    std::uint64_t step = 0;
    std::map<std::string, std::string> config;
    std::vector<CheckpointTensor> tensors;
};

/// "VDPOCKPT", u32 version, u64 step, u32 config entries of (u32 length,
/// bytes) key/value strings, u32 tensor count, then per tensor its name,
/// u64 rows, u64 cols and column-major f64 value, Adam m and Adam v.
void save_checkpoint(const std::string& path, const ParamList& params, const std::map<std::string, std::string>& config,
                     std::uint64_t step);
Checkpoint load_checkpoint(const std::string& path);

/// Copies tensors into `params` by name; every parameter must be present with its shape.
void restore_parameters(const Checkpoint& ckpt, const ParamList& params);

}  // namespace vdpo::nn
