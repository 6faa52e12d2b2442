#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "med/tensor.hpp"

namespace med::nn {

// Versioned binary container mapping tensor names to shape plus row-major
// doubles. Round-trips bit-exactly.
void write_checkpoint(
    const std::string& path,
    const std::vector<std::pair<std::string, const Tensor*>>& entries);

std::map<std::string, Tensor> read_checkpoint(const std::string& path);

}  // namespace med::nn
