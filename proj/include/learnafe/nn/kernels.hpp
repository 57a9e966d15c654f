#pragma once

// 2-D grouped convolution kernels on NCHW data. Weight layout is
// [co][ci/groups][kh][kw]. Padding follows the "same" rule: out = ceil(in/s),
// with the odd pad element placed after the data.

#include <cstddef>

#include "learnafe/common.hpp"

namespace learnafe::nn {

struct ConvShape {
  std::size_t n = 0, ci = 0, h = 0, w = 0;
  std::size_t co = 0, kh = 0, kw = 0;
  std::size_t sh = 1, sw = 1;
  std::size_t ph = 0, pw = 0;  // leading pad
  std::size_t groups = 1;
  std::size_t oh = 0, ow = 0;

  std::size_t x_size() const { return n * ci * h * w; }
  std::size_t y_size() const { return n * co * oh * ow; }
  std::size_t w_size() const { return co * (ci / groups) * kh * kw; }
};

ConvShape same_conv_shape(std::size_t n, std::size_t ci, std::size_t h, std::size_t w,
                          std::size_t co, std::size_t kh, std::size_t kw, std::size_t sh,
                          std::size_t sw, std::size_t groups);

// Optimized kernels. Forward and data-gradient parallelize over output planes,
// the weight gradient over output channels with a serial batch loop, so the
// Serial and Parallel paths give bitwise identical results.
template <class T>
void conv2d_forward(const ConvShape& s, const T* x, const T* w, const T* bias, T* y,
                    Exec exec = Exec::Parallel);
template <class T>
void conv2d_backward_data(const ConvShape& s, const T* dy, const T* w, T* dx,
                          Exec exec = Exec::Parallel);
/// Overwrites dw (and db when non-null).
template <class T>
void conv2d_backward_weight(const ConvShape& s, const T* dy, const T* x, T* dw, T* db,
                            Exec exec = Exec::Parallel);

namespace reference {
// Direct loops with per-tap bounds checks; test oracle and benchmark baseline.
template <class T>
void conv2d_forward(const ConvShape& s, const T* x, const T* w, const T* bias, T* y);
template <class T>
void conv2d_backward_data(const ConvShape& s, const T* dy, const T* w, T* dx);
template <class T>
void conv2d_backward_weight(const ConvShape& s, const T* dy, const T* x, T* dw, T* db);
}  // namespace reference

}  // namespace learnafe::nn
