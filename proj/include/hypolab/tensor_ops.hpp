#pragma once

#include "hypolab/common.hpp"

#include <vector>

namespace hypolab {

// Apply mats[a] (out_a x in_a) along axis a of a row-major tensor with shape `in`.
// nullptr entries leave the axis untouched.
Vec apply_axes(const std::vector<const Mat*>& mats, const std::vector<long>& in, const Vec& x);

}  // namespace hypolab
