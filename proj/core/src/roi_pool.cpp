#include "cadet/roi_pool.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace cadet {

namespace {

// Four-tap bilinear stencil with zero padding beyond one cell outside the
// extent. x_free/y_free mark positions where the sample moves with the
// coordinate, i.e. where the coordinate gradient is live.
struct Taps {
  bool inside = false;
  bool x_free = false, y_free = false;
  int x_low = 0, x_high = 0, y_low = 0, y_high = 0;
  double w1 = 0.0, w2 = 0.0, w3 = 0.0, w4 = 0.0;
  double hy = 0.0, ly = 0.0, hx = 0.0, lx = 0.0;
};

Taps make_taps(double x, double y, int width, int height) {
  Taps t;
  if (y < -1.0 || y > height || x < -1.0 || x > width) return t;
  t.inside = true;
  t.x_free = x > 0.0 && x < width - 1;
  t.y_free = y > 0.0 && y < height - 1;
  if (y <= 0.0) y = 0.0;
  if (x <= 0.0) x = 0.0;
  t.y_low = static_cast<int>(y);
  t.x_low = static_cast<int>(x);
  if (t.y_low >= height - 1) {
    t.y_low = t.y_high = height - 1;
    y = static_cast<double>(t.y_low);
  } else {
    t.y_high = t.y_low + 1;
  }
  if (t.x_low >= width - 1) {
    t.x_low = t.x_high = width - 1;
    x = static_cast<double>(t.x_low);
  } else {
    t.x_high = t.x_low + 1;
  }
  t.ly = y - t.y_low;
  t.lx = x - t.x_low;
  t.hy = 1.0 - t.ly;
  t.hx = 1.0 - t.lx;
  t.w1 = t.hy * t.hx;
  t.w2 = t.hy * t.lx;
  t.w3 = t.ly * t.hx;
  t.w4 = t.ly * t.lx;
  return t;
}

double taps_value(const Taps& t, const double* plane, int width) {
  return t.w1 * plane[t.y_low * width + t.x_low] + t.w2 * plane[t.y_low * width + t.x_high] +
         t.w3 * plane[t.y_high * width + t.x_low] + t.w4 * plane[t.y_high * width + t.x_high];
}

double taps_dx(const Taps& t, const double* plane, int width) {
  if (!t.x_free) return 0.0;
  return t.hy * (plane[t.y_low * width + t.x_high] - plane[t.y_low * width + t.x_low]) +
         t.ly * (plane[t.y_high * width + t.x_high] - plane[t.y_high * width + t.x_low]);
}

double taps_dy(const Taps& t, const double* plane, int width) {
  if (!t.y_free) return 0.0;
  return t.hx * (plane[t.y_high * width + t.x_low] - plane[t.y_low * width + t.x_low]) +
         t.lx * (plane[t.y_high * width + t.x_high] - plane[t.y_low * width + t.x_high]);
}

// Tube box for one frame, clamped to the image and scaled to grid units.
struct FrameRoi {
  double x1 = 0.0, y1 = 0.0, w = 0.0, h = 0.0;
};

std::vector<FrameRoi> tube_rois(const FeatureVolume& fv, const ActionTube& tube) {
  const int h_f = fv.values.dim(2);
  const int w_f = fv.values.dim(3);
  const double img_w = w_f / fv.spatial_scale;
  const double img_h = h_f / fv.spatial_scale;
  std::vector<FrameRoi> rois;
  rois.reserve(tube.boxes.size());
  for (const Box& raw : tube.boxes) {
    validate_box(raw);
    const Box b = clamp_box(raw, img_w, img_h);
    FrameRoi r;
    r.x1 = b.x1 * fv.spatial_scale;
    r.y1 = b.y1 * fv.spatial_scale;
    r.w = (b.x2 - b.x1) * fv.spatial_scale;
    r.h = (b.y2 - b.y1) * fv.spatial_scale;
    rois.push_back(r);
  }
  return rois;
}

Tensor pool_impl(const FeatureVolume& fv, const ActionTube& tube, const Tensor* offsets,
                 const Tensor* modulation, double gamma, int k, int n_s) {
  validate_feature_volume(fv);
  if (k < 1 || n_s < 1) throw ValidationError("pooling needs k >= 1 and n_s >= 1");
  const int c_n = fv.values.dim(0);
  const int m_n = fv.values.dim(1);
  const int h_f = fv.values.dim(2);
  const int w_f = fv.values.dim(3);
  const int l_n = static_cast<int>(tube.boxes.size());
  if (l_n != m_n) {
    throw ShapeError("tube of " + std::to_string(l_n) + " boxes over a volume of " +
                     std::to_string(m_n) + " frames");
  }
  if (offsets != nullptr && offsets->shape() != Shape{l_n, k, k, 2}) {
    throw ShapeError("offset field shape " + shape_str(offsets->shape()) + ", expected " +
                     shape_str({l_n, k, k, 2}));
  }
  if (modulation != nullptr) {
    if (!modulation->defined()) throw ValidationError("modulation tensor is absent");
    if (modulation->shape() != Shape{l_n, k, k}) {
      throw ShapeError("modulation shape " + shape_str(modulation->shape()) + ", expected " +
                       shape_str({l_n, k, k}));
    }
    for (const double v : modulation->values()) {
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("modulation values must lie in [0,1]");
    }
  }

  const std::vector<FrameRoi> rois = tube_rois(fv, tube);
  const double inv_samples = 1.0 / (static_cast<double>(n_s) * n_s);
  const std::size_t plane = static_cast<std::size_t>(h_f) * w_f;
  const double* feat = fv.values.values().data();
  const double* off = offsets ? offsets->values().data() : nullptr;
  const double* mod = modulation ? modulation->values().data() : nullptr;

  std::vector<double> out(static_cast<std::size_t>(c_n) * l_n * k * k, 0.0);
  std::vector<double> acc(static_cast<std::size_t>(c_n));
  for (int t = 0; t < l_n; ++t) {
    const FrameRoi& r = rois[static_cast<std::size_t>(t)];
    const double bin_w = r.w / k;
    const double bin_h = r.h / k;
    for (int by = 0; by < k; ++by) {
      for (int bx = 0; bx < k; ++bx) {
        const std::size_t bin = (static_cast<std::size_t>(t) * k + by) * k + bx;
        double shift_x = 0.0, shift_y = 0.0;
        if (off != nullptr) {
          shift_x = gamma * off[bin * 2] * r.w;
          shift_y = gamma * off[bin * 2 + 1] * r.h;
        }
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int sy = 0; sy < n_s; ++sy) {
          const double y = r.y1 + bin_h * (by + (sy + 0.5) / n_s) + shift_y;
          for (int sx = 0; sx < n_s; ++sx) {
            const double x = r.x1 + bin_w * (bx + (sx + 0.5) / n_s) + shift_x;
            const Taps taps = make_taps(x, y, w_f, h_f);
            if (!taps.inside) continue;
            for (int c = 0; c < c_n; ++c) {
              acc[static_cast<std::size_t>(c)] +=
                  taps_value(taps, feat + (static_cast<std::size_t>(c) * m_n + t) * plane, w_f);
            }
          }
        }
        const double scale = inv_samples * (mod != nullptr ? mod[bin] : 1.0);
        for (int c = 0; c < c_n; ++c) {
          out[((static_cast<std::size_t>(c) * l_n + t) * k + by) * k + bx] =
              acc[static_cast<std::size_t>(c)] * scale;
        }
      }
    }
  }

  bool rg = fv.values.requires_grad();
  if (offsets) rg = rg || offsets->requires_grad();
  if (modulation) rg = rg || modulation->requires_grad();
  const bool tracked = rg && Tape::active() != nullptr;
  Tensor result({c_n, l_n, k, k}, std::move(out), tracked);
  if (!tracked) return result;
  result.impl()->leaf = false;

  std::vector<std::shared_ptr<TensorImpl>> inputs{fv.values.impl()};
  std::shared_ptr<TensorImpl> ioff = offsets ? offsets->impl() : nullptr;
  std::shared_ptr<TensorImpl> imod = modulation ? modulation->impl() : nullptr;
  if (ioff) inputs.push_back(ioff);
  if (imod) inputs.push_back(imod);
  auto ifeat = fv.values.impl();
  auto iout = result.impl();
  Tape::active()->record(
      inputs, iout,
      [ifeat, ioff, imod, iout, rois, gamma, k, n_s, c_n, m_n, h_f, w_f, l_n, inv_samples,
       plane] {
        const std::vector<double>& g = iout->grad;
        const double* feat = ifeat->data.data();
        const double* off = ioff ? ioff->data.data() : nullptr;
        const double* mod = imod ? imod->data.data() : nullptr;
        const bool need_feat = ifeat->requires_grad;
        const bool need_off = ioff && ioff->requires_grad;
        const bool need_mod = imod && imod->requires_grad;
        std::vector<double> sum_v(static_cast<std::size_t>(c_n));
        for (int t = 0; t < l_n; ++t) {
          const FrameRoi& r = rois[static_cast<std::size_t>(t)];
          const double bin_w = r.w / k;
          const double bin_h = r.h / k;
          for (int by = 0; by < k; ++by) {
            for (int bx = 0; bx < k; ++bx) {
              const std::size_t bin = (static_cast<std::size_t>(t) * k + by) * k + bx;
              double shift_x = 0.0, shift_y = 0.0;
              if (off != nullptr) {
                shift_x = gamma * off[bin * 2] * r.w;
                shift_y = gamma * off[bin * 2 + 1] * r.h;
              }
              const double m = mod != nullptr ? mod[bin] : 1.0;
              double gx_acc = 0.0, gy_acc = 0.0;
              if (need_mod) std::fill(sum_v.begin(), sum_v.end(), 0.0);
              for (int sy = 0; sy < n_s; ++sy) {
                const double y = r.y1 + bin_h * (by + (sy + 0.5) / n_s) + shift_y;
                for (int sx = 0; sx < n_s; ++sx) {
                  const double x = r.x1 + bin_w * (bx + (sx + 0.5) / n_s) + shift_x;
                  const Taps taps = make_taps(x, y, w_f, h_f);
                  if (!taps.inside) continue;
                  for (int c = 0; c < c_n; ++c) {
                    const std::size_t base = (static_cast<std::size_t>(c) * m_n + t) * plane;
                    const double gc =
                        g[((static_cast<std::size_t>(c) * l_n + t) * k + by) * k + bx];
                    const double coef = gc * inv_samples * m;
                    if (need_feat) {
                      ifeat->grad[base + static_cast<std::size_t>(taps.y_low) * w_f + taps.x_low] +=
                          coef * taps.w1;
                      ifeat->grad[base + static_cast<std::size_t>(taps.y_low) * w_f + taps.x_high] +=
                          coef * taps.w2;
                      ifeat->grad[base + static_cast<std::size_t>(taps.y_high) * w_f + taps.x_low] +=
                          coef * taps.w3;
                      ifeat->grad[base + static_cast<std::size_t>(taps.y_high) * w_f + taps.x_high] +=
                          coef * taps.w4;
                    }
                    if (need_off) {
                      gx_acc += coef * taps_dx(taps, feat + base, w_f);
                      gy_acc += coef * taps_dy(taps, feat + base, w_f);
                    }
                    if (need_mod) {
                      sum_v[static_cast<std::size_t>(c)] += taps_value(taps, feat + base, w_f);
                    }
                  }
                }
              }
              if (need_off) {
                ioff->grad[bin * 2] += gx_acc * gamma * r.w;
                ioff->grad[bin * 2 + 1] += gy_acc * gamma * r.h;
              }
              if (need_mod) {
                double gm = 0.0;
                for (int c = 0; c < c_n; ++c) {
                  gm += g[((static_cast<std::size_t>(c) * l_n + t) * k + by) * k + bx] *
                        sum_v[static_cast<std::size_t>(c)] * inv_samples;
                }
                imod->grad[bin] += gm;
              }
            }
          }
        }
      });
  return result;
}

}  // namespace

void validate_feature_volume(const FeatureVolume& fv) {
  if (!fv.values.defined() || fv.values.ndim() != 4) {
    throw ShapeError("feature volume must be a (C, M, H, W) tensor");
  }
  if (!(fv.spatial_scale > 0.0)) throw ValidationError("spatial scale must be positive");
}

Tensor bilinear_sample(const FeatureVolume& fv, int frame, const Tensor& x, const Tensor& y) {
  validate_feature_volume(fv);
  if (frame < 0 || frame >= fv.values.dim(1)) {
    throw ValidationError("sample frame " + std::to_string(frame) + " outside volume");
  }
  if (x.numel() != 1 || y.numel() != 1) {
    throw ShapeError("sample coordinates must be scalars");
  }
  const int c_n = fv.values.dim(0);
  const int m_n = fv.values.dim(1);
  const int h_f = fv.values.dim(2);
  const int w_f = fv.values.dim(3);
  const std::size_t plane = static_cast<std::size_t>(h_f) * w_f;
  const Taps taps = make_taps(x.item(), y.item(), w_f, h_f);
  std::vector<double> out(static_cast<std::size_t>(c_n), 0.0);
  const double* feat = fv.values.values().data();
  if (taps.inside) {
    for (int c = 0; c < c_n; ++c) {
      out[static_cast<std::size_t>(c)] =
          taps_value(taps, feat + (static_cast<std::size_t>(c) * m_n + frame) * plane, w_f);
    }
  }

  const bool rg = fv.values.requires_grad() || x.requires_grad() || y.requires_grad();
  const bool tracked = rg && Tape::active() != nullptr;
  Tensor result({c_n}, std::move(out), tracked);
  if (!tracked) return result;
  result.impl()->leaf = false;
  Tape::active()->record(
      {fv.values.impl(), x.impl(), y.impl()}, result.impl(),
      [ifeat = fv.values.impl(), ix = x.impl(), iy = y.impl(), iout = result.impl(), taps, frame,
       c_n, m_n, w_f, plane] {
        if (!taps.inside) return;
        const double* feat = ifeat->data.data();
        double gx = 0.0, gy = 0.0;
        for (int c = 0; c < c_n; ++c) {
          const std::size_t base = (static_cast<std::size_t>(c) * m_n + frame) * plane;
          const double gc = iout->grad[static_cast<std::size_t>(c)];
          if (ifeat->requires_grad) {
            ifeat->grad[base + static_cast<std::size_t>(taps.y_low) * w_f + taps.x_low] +=
                gc * taps.w1;
            ifeat->grad[base + static_cast<std::size_t>(taps.y_low) * w_f + taps.x_high] +=
                gc * taps.w2;
            ifeat->grad[base + static_cast<std::size_t>(taps.y_high) * w_f + taps.x_low] +=
                gc * taps.w3;
            ifeat->grad[base + static_cast<std::size_t>(taps.y_high) * w_f + taps.x_high] +=
                gc * taps.w4;
          }
          gx += gc * taps_dx(taps, feat + base, w_f);
          gy += gc * taps_dy(taps, feat + base, w_f);
        }
        if (ix->requires_grad) ix->grad[0] += gx;
        if (iy->requires_grad) iy->grad[0] += gy;
      });
  return result;
}

Tensor roi_pool_3d(const FeatureVolume& fv, const ActionTube& tube, int k, int n_s) {
  return pool_impl(fv, tube, nullptr, nullptr, 0.0, k, n_s);
}

Tensor deformable_roi_pool_3d(const FeatureVolume& fv, const ActionTube& tube,
                              const Tensor& offsets, double gamma, int n_s) {
  if (!offsets.defined() || offsets.ndim() != 4 || offsets.dim(3) != 2) {
    throw ShapeError("offset field must have shape (L, k, k, 2)");
  }
  return pool_impl(fv, tube, &offsets, nullptr, gamma, offsets.dim(1), n_s);
}

Tensor modulated_deformable_roi_pool_3d(const FeatureVolume& fv, const ActionTube& tube,
                                        const Tensor& offsets, const Tensor& modulation,
                                        double gamma, int n_s) {
  if (!offsets.defined() || offsets.ndim() != 4 || offsets.dim(3) != 2) {
    throw ShapeError("offset field must have shape (L, k, k, 2)");
  }
  if (!modulation.defined()) throw ValidationError("modulated pooling without modulation");
  return pool_impl(fv, tube, &offsets, &modulation, gamma, offsets.dim(1), n_s);
}

OffsetPredictor make_offset_predictor(int c, int l, int k, bool modulated,
                                      bool shared_over_time) {
  if (c < 1 || l < 1 || k < 1) throw ValidationError("offset predictor dims must be positive");
  const int in_dim = c * l * k * k;
  const int grid = shared_over_time ? k * k : l * k * k;
  const int out_dim = grid * 2 + (modulated ? grid : 0);
  OffsetPredictor p;
  p.weight = Tensor::zeros({in_dim, out_dim}, true);
  p.bias = Tensor::zeros({out_dim}, true);
  p.modulated = modulated;
  p.shared_over_time = shared_over_time;
  return p;
}

OffsetField predict_offsets(const Tensor& pooled, const OffsetPredictor& p) {
  if (!pooled.defined() || pooled.ndim() != 4) {
    throw ShapeError("pooled features must have shape (C, L, k, k)");
  }
  const int l_n = pooled.dim(1);
  const int k = pooled.dim(2);
  if (pooled.dim(3) != k) throw ShapeError("pooled bin grid must be square");
  const int in_dim = static_cast<int>(pooled.numel());
  const int grid = p.shared_over_time ? k * k : l_n * k * k;
  const int out_dim = grid * 2 + (p.modulated ? grid : 0);
  if (!p.weight.defined() || p.weight.shape() != Shape{in_dim, out_dim} ||
      p.bias.shape() != Shape{out_dim}) {
    throw ShapeError("offset predictor parameters do not match pooled input " +
                     shape_str(pooled.shape()));
  }

  const Tensor flat = reshape(pooled, {1, in_dim});
  const Tensor raw = reshape(add_rowvec(matmul(flat, p.weight), p.bias), {out_dim});

  OffsetField field;
  if (p.shared_over_time) {
    const Tensor off_row = slice1d(raw, 0, static_cast<std::int64_t>(k) * k * 2);
    field.offsets = reshape(stack_rows(std::vector<Tensor>(static_cast<std::size_t>(l_n), off_row)),
                            {l_n, k, k, 2});
    if (p.modulated) {
      const Tensor mod_row = sigmoid(slice1d(raw, static_cast<std::int64_t>(k) * k * 2,
                                             static_cast<std::int64_t>(k) * k));
      field.modulation = reshape(
          stack_rows(std::vector<Tensor>(static_cast<std::size_t>(l_n), mod_row)), {l_n, k, k});
    }
  } else {
    field.offsets =
        reshape(slice1d(raw, 0, static_cast<std::int64_t>(grid) * 2), {l_n, k, k, 2});
    if (p.modulated) {
      field.modulation =
          reshape(sigmoid(slice1d(raw, static_cast<std::int64_t>(grid) * 2, grid)), {l_n, k, k});
    }
  }
  return field;
}

}  // namespace cadet
