#pragma once

#include <map>
#include <string>

#include "cadet/tensor.hpp"

namespace cadet {

// Binary container for named tensors. Entries are written sorted by key so
// equal contents produce byte-identical files.
void save_checkpoint(const std::string& path, const std::map<std::string, Tensor>& tensors);

std::map<std::string, Tensor> load_checkpoint(const std::string& path);

}  // namespace cadet
