#include "qvc/nn/tensor.hpp"

#include <algorithm>

#include "qvc/errors.hpp"

namespace qvc::nn {

std::size_t shape_numel(std::span<const std::int64_t> shape) {
  std::size_t n = 1;
  for (auto d : shape) {
    if (d < 0) throw ShapeError("negative dimension in shape " + shape_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_string(std::span<const std::int64_t> shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

Tensor::Tensor(std::vector<std::int64_t> s, float fill) : shape(std::move(s)), data(shape_numel(shape), fill) {}

Tensor::Tensor(std::vector<std::int64_t> s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
  if (data.size() != shape_numel(shape)) {
    throw ShapeError("tensor payload of " + std::to_string(data.size()) + " values does not match shape " +
                     shape_string(shape));
  }
}

Tensor3 slice_channels(const Tensor3& x, std::size_t begin, std::size_t count) {
  if (begin + count > x.channels) throw ShapeError("slice_channels: range exceeds channel count");
  Tensor3 out(x.batch, count, x.time);
  for (std::size_t b = 0; b < x.batch; ++b) {
    std::copy_n(x.plane(b) + begin * x.time, count * x.time, out.plane(b));
  }
  return out;
}

Tensor3 concat_channels(const Tensor3& a, const Tensor3& b) {
  if (a.batch != b.batch || a.time != b.time) throw ShapeError("concat_channels: batch/time mismatch");
  Tensor3 out(a.batch, a.channels + b.channels, a.time);
  for (std::size_t i = 0; i < a.batch; ++i) {
    std::copy_n(a.plane(i), a.channels * a.time, out.plane(i));
    std::copy_n(b.plane(i), b.channels * b.time, out.plane(i) + a.channels * a.time);
  }
  return out;
}

}  // namespace qvc::nn
