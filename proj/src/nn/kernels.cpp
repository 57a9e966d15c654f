#include "learnafe/nn/kernels.hpp"

#include <algorithm>
#include <vector>

namespace learnafe::nn {

namespace {

// Output indices o with 0 <= o*s - p + k < n, as the half-open range [lo, hi).
struct Range {
  std::size_t lo, hi;
};

inline Range valid_range(std::size_t k, std::size_t p, std::size_t s, std::size_t n,
                         std::size_t o) {
  const std::size_t lo = p > k ? (p - k + s - 1) / s : 0;
  if (n + p <= k) return {0, 0};
  const std::size_t hi = std::min(o, (n - 1 + p - k) / s + 1);
  return {std::min(lo, hi), hi};
}

}  // namespace

ConvShape same_conv_shape(std::size_t n, std::size_t ci, std::size_t h, std::size_t w,
                          std::size_t co, std::size_t kh, std::size_t kw, std::size_t sh,
                          std::size_t sw, std::size_t groups) {
  if (groups == 0 || ci % groups != 0 || co % groups != 0) {
    throw DomainError("channel counts must be divisible by the group count");
  }
  if (sh == 0 || sw == 0 || kh == 0 || kw == 0) throw DomainError("kernel and stride must be >= 1");
  if (h == 0 || w == 0) throw DomainError("empty feature map");
  ConvShape s{n, ci, h, w, co, kh, kw, sh, sw, 0, 0, groups, 0, 0};
  s.oh = (h + sh - 1) / sh;
  s.ow = (w + sw - 1) / sw;
  const std::size_t need_h = (s.oh - 1) * sh + kh;
  const std::size_t need_w = (s.ow - 1) * sw + kw;
  s.ph = need_h > h ? (need_h - h) / 2 : 0;
  s.pw = need_w > w ? (need_w - w) / 2 : 0;
  return s;
}

namespace {

// Fixed-order dot product with eight independent partial sums, so the
// compiler can vectorize it without reassociating across calls.
template <class T>
inline T dot(const T* a, const T* b, std::size_t n) {
  T acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t q = 0; q < 8; ++q) acc[q] += a[i + q] * b[i + q];
  }
  T tail{};
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail;
}

template <class T>
inline void axpy(T a, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

inline bool is_pointwise(const ConvShape& s) {
  return s.kh == 1 && s.kw == 1 && s.sh == 1 && s.sw == 1 && s.ph == 0 && s.pw == 0;
}

// Column matrix of one sample: row (ci, i, j), column (oh, ow); zero where
// the tap falls into padding.
template <class T>
void im2col(const ConvShape& s, const T* x, T* cols) {
  const std::size_t p = s.oh * s.ow;
  for (std::size_t c = 0; c < s.ci; ++c) {
    const T* xp = x + c * s.h * s.w;
    for (std::size_t i = 0; i < s.kh; ++i) {
      const Range rh = valid_range(i, s.ph, s.sh, s.h, s.oh);
      for (std::size_t j = 0; j < s.kw; ++j) {
        const Range rw = valid_range(j, s.pw, s.sw, s.w, s.ow);
        T* row = cols + ((c * s.kh + i) * s.kw + j) * p;
        std::fill(row, row + p, T{});
        for (std::size_t oh = rh.lo; oh < rh.hi; ++oh) {
          const T* xr = xp + (oh * s.sh + i - s.ph) * s.w;
          T* cr = row + oh * s.ow;
          for (std::size_t ow = rw.lo; ow < rw.hi; ++ow) cr[ow] = xr[ow * s.sw + j - s.pw];
        }
      }
    }
  }
}

template <class T>
void col2im_add(const ConvShape& s, const T* cols, T* dx) {
  const std::size_t p = s.oh * s.ow;
  for (std::size_t c = 0; c < s.ci; ++c) {
    T* xp = dx + c * s.h * s.w;
    for (std::size_t i = 0; i < s.kh; ++i) {
      const Range rh = valid_range(i, s.ph, s.sh, s.h, s.oh);
      for (std::size_t j = 0; j < s.kw; ++j) {
        const Range rw = valid_range(j, s.pw, s.sw, s.w, s.ow);
        const T* row = cols + ((c * s.kh + i) * s.kw + j) * p;
        for (std::size_t oh = rh.lo; oh < rh.hi; ++oh) {
          T* xr = xp + (oh * s.sh + i - s.ph) * s.w;
          const T* cr = row + oh * s.ow;
          for (std::size_t ow = rw.lo; ow < rw.hi; ++ow) xr[ow * s.sw + j - s.pw] += cr[ow];
        }
      }
    }
  }
}

// Dense (groups == 1) convolution as a per-sample matrix product.
template <class T>
void dense_forward(const ConvShape& s, const T* x, const T* w, const T* bias, T* y, Exec exec) {
  const std::size_t k = s.ci * s.kh * s.kw, p = s.oh * s.ow;
  const bool pw = is_pointwise(s);
  const auto ns = static_cast<std::ptrdiff_t>(s.n);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::ptrdiff_t nn = 0; nn < ns; ++nn) {
    const auto n = static_cast<std::size_t>(nn);
    std::vector<T> buf;
    const T* cols = x + n * s.ci * s.h * s.w;
    if (!pw) {
      buf.resize(k * p);
      im2col(s, cols, buf.data());
      cols = buf.data();
    }
    for (std::size_t c = 0; c < s.co; ++c) {
      T* yp = y + (n * s.co + c) * p;
      std::fill(yp, yp + p, bias ? bias[c] : T{});
      const T* wr = w + c * k;
      for (std::size_t q = 0; q < k; ++q) axpy(wr[q], cols + q * p, yp, p);
    }
  }
}

template <class T>
void dense_backward_data(const ConvShape& s, const T* dy, const T* w, T* dx, Exec exec) {
  const std::size_t k = s.ci * s.kh * s.kw, p = s.oh * s.ow;
  const bool pw = is_pointwise(s);
  const auto ns = static_cast<std::ptrdiff_t>(s.n);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::ptrdiff_t nn = 0; nn < ns; ++nn) {
    const auto n = static_cast<std::size_t>(nn);
    T* xp = dx + n * s.ci * s.h * s.w;
    std::vector<T> buf;
    T* dcols = xp;
    if (!pw) {
      buf.assign(k * p, T{});
      dcols = buf.data();
    } else {
      std::fill(xp, xp + s.ci * s.h * s.w, T{});
    }
    for (std::size_t q = 0; q < k; ++q) {
      T* row = dcols + q * p;
      for (std::size_t c = 0; c < s.co; ++c) axpy(w[c * k + q], dy + (n * s.co + c) * p, row, p);
    }
    if (!pw) {
      std::fill(xp, xp + s.ci * s.h * s.w, T{});
      col2im_add(s, dcols, xp);
    }
  }
}

template <class T>
void dense_backward_weight(const ConvShape& s, const T* dy, const T* x, T* dw, T* db, Exec exec) {
  const std::size_t k = s.ci * s.kh * s.kw, p = s.oh * s.ow;
  const bool pw = is_pointwise(s);
  std::vector<T> all_cols;
  if (!pw) {
    all_cols.resize(s.n * k * p);
    for (std::size_t n = 0; n < s.n; ++n) im2col(s, x + n * s.ci * s.h * s.w, all_cols.data() + n * k * p);
  }
  const T* cols_base = pw ? x : all_cols.data();
  const auto cos = static_cast<std::ptrdiff_t>(s.co);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::ptrdiff_t cc = 0; cc < cos; ++cc) {
    const auto c = static_cast<std::size_t>(cc);
    T* wr = dw + c * k;
    std::fill(wr, wr + k, T{});
    T bsum{};
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* yp = dy + (n * s.co + c) * p;
      const T* cols = cols_base + n * k * p;
      if (db) {
        for (std::size_t t = 0; t < p; ++t) bsum += yp[t];
      }
      for (std::size_t q = 0; q < k; ++q) wr[q] += dot(yp, cols + q * p, p);
    }
    if (db) db[c] = bsum;
  }
}

}  // namespace

template <class T>
void conv2d_forward(const ConvShape& s, const T* x, const T* w, const T* bias, T* y, Exec exec) {
  if (s.groups == 1) return dense_forward(s, x, w, bias, y, exec);
  const std::size_t cig = s.ci / s.groups, cog = s.co / s.groups;
  const std::size_t in_plane = s.h * s.w, out_plane = s.oh * s.ow;
  const auto planes = static_cast<std::ptrdiff_t>(s.n * s.co);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::ptrdiff_t idx = 0; idx < planes; ++idx) {
    const std::size_t n = static_cast<std::size_t>(idx) / s.co;
    const std::size_t c = static_cast<std::size_t>(idx) % s.co;
    const std::size_t g = c / cog;
    T* yp = y + static_cast<std::size_t>(idx) * out_plane;
    std::fill(yp, yp + out_plane, bias ? bias[c] : T{});
    for (std::size_t k = 0; k < cig; ++k) {
      const T* xp = x + (n * s.ci + g * cig + k) * in_plane;
      const T* wp = w + (c * cig + k) * s.kh * s.kw;
      for (std::size_t i = 0; i < s.kh; ++i) {
        const Range rh = valid_range(i, s.ph, s.sh, s.h, s.oh);
        for (std::size_t j = 0; j < s.kw; ++j) {
          const Range rw = valid_range(j, s.pw, s.sw, s.w, s.ow);
          const T wv = wp[i * s.kw + j];
          for (std::size_t oh = rh.lo; oh < rh.hi; ++oh) {
            const T* xr = xp + (oh * s.sh + i - s.ph) * s.w;
            T* yr = yp + oh * s.ow;
            if (s.sw == 1) {
              axpy(wv, xr + rw.lo + j - s.pw, yr + rw.lo, rw.hi - rw.lo);
            } else {
              for (std::size_t ow = rw.lo; ow < rw.hi; ++ow) yr[ow] += wv * xr[ow * s.sw + j - s.pw];
            }
          }
        }
      }
    }
  }
}

template <class T>
void conv2d_backward_data(const ConvShape& s, const T* dy, const T* w, T* dx, Exec exec) {
  if (s.groups == 1) return dense_backward_data(s, dy, w, dx, exec);
  const std::size_t cig = s.ci / s.groups, cog = s.co / s.groups;
  const std::size_t in_plane = s.h * s.w, out_plane = s.oh * s.ow;
  const auto planes = static_cast<std::ptrdiff_t>(s.n * s.ci);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::ptrdiff_t idx = 0; idx < planes; ++idx) {
    const std::size_t n = static_cast<std::size_t>(idx) / s.ci;
    const std::size_t ci = static_cast<std::size_t>(idx) % s.ci;
    const std::size_t g = ci / cig, k = ci % cig;
    T* xp = dx + static_cast<std::size_t>(idx) * in_plane;
    std::fill(xp, xp + in_plane, T{});
    for (std::size_t c = g * cog; c < (g + 1) * cog; ++c) {
      const T* yp = dy + (n * s.co + c) * out_plane;
      const T* wp = w + (c * cig + k) * s.kh * s.kw;
      for (std::size_t i = 0; i < s.kh; ++i) {
        const Range rh = valid_range(i, s.ph, s.sh, s.h, s.oh);
        for (std::size_t j = 0; j < s.kw; ++j) {
          const Range rw = valid_range(j, s.pw, s.sw, s.w, s.ow);
          const T wv = wp[i * s.kw + j];
          for (std::size_t oh = rh.lo; oh < rh.hi; ++oh) {
            T* xr = xp + (oh * s.sh + i - s.ph) * s.w;
            const T* yr = yp + oh * s.ow;
            if (s.sw == 1) {
              axpy(wv, yr + rw.lo, xr + rw.lo + j - s.pw, rw.hi - rw.lo);
            } else {
              for (std::size_t ow = rw.lo; ow < rw.hi; ++ow) xr[ow * s.sw + j - s.pw] += wv * yr[ow];
            }
          }
        }
      }
    }
  }
}

template <class T>
void conv2d_backward_weight(const ConvShape& s, const T* dy, const T* x, T* dw, T* db, Exec exec) {
  if (s.groups == 1) return dense_backward_weight(s, dy, x, dw, db, exec);
  const std::size_t cig = s.ci / s.groups, cog = s.co / s.groups;
  const std::size_t in_plane = s.h * s.w, out_plane = s.oh * s.ow;
  const auto cos = static_cast<std::ptrdiff_t>(s.co);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::ptrdiff_t cc = 0; cc < cos; ++cc) {
    const auto c = static_cast<std::size_t>(cc);
    const std::size_t g = c / cog;
    T* wp = dw + c * cig * s.kh * s.kw;
    std::fill(wp, wp + cig * s.kh * s.kw, T{});
    T bsum{};
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* yp = dy + (n * s.co + c) * out_plane;
      if (db) {
        for (std::size_t t = 0; t < out_plane; ++t) bsum += yp[t];
      }
      for (std::size_t k = 0; k < cig; ++k) {
        const T* xp = x + (n * s.ci + g * cig + k) * in_plane;
        for (std::size_t i = 0; i < s.kh; ++i) {
          const Range rh = valid_range(i, s.ph, s.sh, s.h, s.oh);
          for (std::size_t j = 0; j < s.kw; ++j) {
            const Range rw = valid_range(j, s.pw, s.sw, s.w, s.ow);
            T acc{};
            for (std::size_t oh = rh.lo; oh < rh.hi; ++oh) {
              const T* xr = xp + (oh * s.sh + i - s.ph) * s.w;
              const T* yr = yp + oh * s.ow;
              if (s.sw == 1) {
                acc += dot(yr + rw.lo, xr + rw.lo + j - s.pw, rw.hi - rw.lo);
              } else {
                for (std::size_t ow = rw.lo; ow < rw.hi; ++ow) acc += yr[ow] * xr[ow * s.sw + j - s.pw];
              }
            }
            wp[(k * s.kh + i) * s.kw + j] += acc;
          }
        }
      }
    }
    if (db) db[c] = bsum;
  }
}

namespace reference {

namespace {
inline bool in_bounds(std::ptrdiff_t v, std::size_t n) {
  return v >= 0 && static_cast<std::size_t>(v) < n;
}
}  // namespace

template <class T>
void conv2d_forward(const ConvShape& s, const T* x, const T* w, const T* bias, T* y) {
  const std::size_t cig = s.ci / s.groups, cog = s.co / s.groups;
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.co; ++c)
      for (std::size_t oh = 0; oh < s.oh; ++oh)
        for (std::size_t ow = 0; ow < s.ow; ++ow) {
          T acc = bias ? bias[c] : T{};
          const std::size_t g = c / cog;
          for (std::size_t k = 0; k < cig; ++k)
            for (std::size_t i = 0; i < s.kh; ++i)
              for (std::size_t j = 0; j < s.kw; ++j) {
                const auto ih = static_cast<std::ptrdiff_t>(oh * s.sh + i) - static_cast<std::ptrdiff_t>(s.ph);
                const auto iw = static_cast<std::ptrdiff_t>(ow * s.sw + j) - static_cast<std::ptrdiff_t>(s.pw);
                if (!in_bounds(ih, s.h) || !in_bounds(iw, s.w)) continue;
                acc += w[((c * cig + k) * s.kh + i) * s.kw + j] *
                       x[((n * s.ci + g * cig + k) * s.h + ih) * s.w + iw];
              }
          y[((n * s.co + c) * s.oh + oh) * s.ow + ow] = acc;
        }
}

template <class T>
void conv2d_backward_data(const ConvShape& s, const T* dy, const T* w, T* dx) {
  const std::size_t cig = s.ci / s.groups, cog = s.co / s.groups;
  std::fill(dx, dx + s.x_size(), T{});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.co; ++c)
      for (std::size_t oh = 0; oh < s.oh; ++oh)
        for (std::size_t ow = 0; ow < s.ow; ++ow) {
          const T g_out = dy[((n * s.co + c) * s.oh + oh) * s.ow + ow];
          const std::size_t g = c / cog;
          for (std::size_t k = 0; k < cig; ++k)
            for (std::size_t i = 0; i < s.kh; ++i)
              for (std::size_t j = 0; j < s.kw; ++j) {
                const auto ih = static_cast<std::ptrdiff_t>(oh * s.sh + i) - static_cast<std::ptrdiff_t>(s.ph);
                const auto iw = static_cast<std::ptrdiff_t>(ow * s.sw + j) - static_cast<std::ptrdiff_t>(s.pw);
                if (!in_bounds(ih, s.h) || !in_bounds(iw, s.w)) continue;
                dx[((n * s.ci + g * cig + k) * s.h + ih) * s.w + iw] +=
                    w[((c * cig + k) * s.kh + i) * s.kw + j] * g_out;
              }
        }
}

template <class T>
void conv2d_backward_weight(const ConvShape& s, const T* dy, const T* x, T* dw, T* db) {
  const std::size_t cig = s.ci / s.groups, cog = s.co / s.groups;
  std::fill(dw, dw + s.w_size(), T{});
  if (db) std::fill(db, db + s.co, T{});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.co; ++c)
      for (std::size_t oh = 0; oh < s.oh; ++oh)
        for (std::size_t ow = 0; ow < s.ow; ++ow) {
          const T g_out = dy[((n * s.co + c) * s.oh + oh) * s.ow + ow];
          if (db) db[c] += g_out;
          const std::size_t g = c / cog;
          for (std::size_t k = 0; k < cig; ++k)
            for (std::size_t i = 0; i < s.kh; ++i)
              for (std::size_t j = 0; j < s.kw; ++j) {
                const auto ih = static_cast<std::ptrdiff_t>(oh * s.sh + i) - static_cast<std::ptrdiff_t>(s.ph);
                const auto iw = static_cast<std::ptrdiff_t>(ow * s.sw + j) - static_cast<std::ptrdiff_t>(s.pw);
                if (!in_bounds(ih, s.h) || !in_bounds(iw, s.w)) continue;
                dw[((c * cig + k) * s.kh + i) * s.kw + j] +=
                    g_out * x[((n * s.ci + g * cig + k) * s.h + ih) * s.w + iw];
              }
        }
}

}  // namespace reference

#define LEARNAFE_INSTANTIATE(T)                                                                  \
  template void conv2d_forward<T>(const ConvShape&, const T*, const T*, const T*, T*, Exec);    \
  template void conv2d_backward_data<T>(const ConvShape&, const T*, const T*, T*, Exec);        \
  template void conv2d_backward_weight<T>(const ConvShape&, const T*, const T*, T*, T*, Exec);  \
  template void reference::conv2d_forward<T>(const ConvShape&, const T*, const T*, const T*, T*); \
  template void reference::conv2d_backward_data<T>(const ConvShape&, const T*, const T*, T*);   \
  template void reference::conv2d_backward_weight<T>(const ConvShape&, const T*, const T*, T*, T*);

LEARNAFE_INSTANTIATE(float)
LEARNAFE_INSTANTIATE(double)

#undef LEARNAFE_INSTANTIATE

}  // namespace learnafe::nn
