#pragma once

#include <string>
#include <vector>

#include "emseg/attention.hpp"
#include "emseg/matrix.hpp"

namespace emseg {

// Flat little-endian container: magic "CSW1", u64 matrix count, then each
// matrix as u64 rows, u64 cols and a row-major f64 payload.
void save_bundle(const std::string& path, const std::vector<Matrix>& matrices);
std::vector<Matrix> load_bundle(const std::string& path);

// attention parameters as the bundle [w_q, w_k, w_v, head_merge, 1x1 heads]
void save_attention_params(const std::string& path, const AttentionParams& p);
AttentionParams load_attention_params(const std::string& path);

}  // namespace emseg
