#pragma once

// Inference half of the variational prototyping encoder.
//
// Architecture: four stride-2 convolutions (kernel 4, padding 1)
// 3 -> 32 -> 64 -> 128 -> 256 channels, each followed by LeakyReLU(0.2),
// taking 64x64 to 4x4; flatten to 4096 (channel-major); affine mean head
// of width 300. The log-variance head is loaded but never evaluated.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "signgraph/image.hpp"
#include "signgraph/weights.hpp"

namespace signgraph {

inline constexpr int kInputSize = 64;
inline constexpr int kInputChannels = 3;
inline constexpr int kLatentDim = 300;
inline constexpr float kLeakySlope = 0.2f;

/// Preprocessed network input, channel-major (3 x 64 x 64), values in [-1, 1].
struct InputTensor {
  std::vector<float> values;

  friend bool operator==(const InputTensor&, const InputTensor&) = default;
};

/// Latent mean of a patch.
struct Embedding {
  std::vector<float> values;

  friend bool operator==(const Embedding&, const Embedding&) = default;
};

/// Bilinear resize with half-pixel centers (source coordinate
/// (d + 0.5) * in/out - 0.5, clamped at 0 and at the last pixel). Returns
/// interleaved RGB samples on the 0..255 scale.
inline std::vector<float> resize_bilinear(const ImagePatch& patch, int out_w, int out_h) {
  if (patch.empty()) throw Error(ErrorKind::validation, "zero-area image patch");
  std::vector<float> out(static_cast<std::size_t>(out_w) * out_h * 3);
  const double scale_x = static_cast<double>(patch.width) / out_w;
  const double scale_y = static_cast<double>(patch.height) / out_h;

  struct Tap {
    int lo, hi;
    double frac;
  };
  auto taps = [](int n_out, int n_in, double scale) {
    std::vector<Tap> t(static_cast<std::size_t>(n_out));
    for (int d = 0; d < n_out; ++d) {
      double src = std::max(0.0, (d + 0.5) * scale - 0.5);
      int lo = std::min(static_cast<int>(src), n_in - 1);
      int hi = std::min(lo + 1, n_in - 1);
      t[static_cast<std::size_t>(d)] = {lo, hi, src - lo};
    }
    return t;
  };
  const auto tx = taps(out_w, patch.width, scale_x);
  const auto ty = taps(out_h, patch.height, scale_y);

  for (int y = 0; y < out_h; ++y) {
    const auto& [y0, y1, fy] = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < out_w; ++x) {
      const auto& [x0, x1, fx] = tx[static_cast<std::size_t>(x)];
      for (int c = 0; c < 3; ++c) {
        double top = (1 - fx) * patch.at(x0, y0, c) + fx * patch.at(x1, y0, c);
        double bottom = (1 - fx) * patch.at(x0, y1, c) + fx * patch.at(x1, y1, c);
        out[(static_cast<std::size_t>(y) * out_w + x) * 3 + c] =
            static_cast<float>((1 - fy) * top + fy * bottom);
      }
    }
  }
  return out;
}

/// Resize to 64x64 and map each sample x to (x/255 - 0.5)/0.5.
inline InputTensor preprocess(const ImagePatch& patch) {
  const auto rgb = resize_bilinear(patch, kInputSize, kInputSize);
  constexpr std::size_t plane = static_cast<std::size_t>(kInputSize) * kInputSize;
  InputTensor t;
  t.values.resize(plane * kInputChannels);
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < kInputChannels; ++c) {
      t.values[c * plane + i] = (rgb[i * 3 + c] / 255.0f - 0.5f) / 0.5f;
    }
  }
  return t;
}

/// Immutable encoder weights; safe to share across threads.
class EncoderModel {
 public:
  /// Validates names and shapes. `dec.*` tensors are skipped; any other
  /// unexpected tensor is an error.
  static EncoderModel from_tensors(std::vector<NamedTensor> tensors) {
    EncoderModel model;
    for (auto& nt : tensors) {
      if (nt.name.rfind("dec.", 0) == 0) continue;
      auto spec = std::find_if(encoder_tensor_specs().begin(), encoder_tensor_specs().end(),
                               [&](const TensorSpec& s) { return s.name == nt.name; });
      if (spec == encoder_tensor_specs().end()) {
        throw Error(ErrorKind::format, "unexpected tensor '" + nt.name + "'");
      }
      if (nt.tensor.shape != spec->shape) {
        throw Error(ErrorKind::format, "shape mismatch for tensor '" + nt.name + "'");
      }
      if (!model.tensors_.emplace(nt.name, std::move(nt.tensor)).second) {
        throw Error(ErrorKind::format, "duplicate tensor '" + nt.name + "'");
      }
    }
    for (const auto& spec : encoder_tensor_specs()) {
      if (!model.tensors_.count(std::string(spec.name))) {
        throw Error(ErrorKind::format, "missing tensor '" + std::string(spec.name) + "'");
      }
    }
    return model;
  }

  static EncoderModel load(const std::filesystem::path& path) {
    return from_tensors(read_weights_file(path));
  }

  static EncoderModel zeros() {
    std::vector<NamedTensor> tensors;
    for (const auto& spec : encoder_tensor_specs()) {
      tensors.push_back({std::string(spec.name), Tensor::zeros(spec.shape)});
    }
    return from_tensors(std::move(tensors));
  }

  std::size_t tensor_count() const noexcept { return tensors_.size(); }
  int latent_dim() const noexcept { return kLatentDim; }

  const Tensor& tensor(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw Error(ErrorKind::not_found, "no tensor " + name);
    return it->second;
  }

  /// Tensors in canonical order, ready for serialize_weights.
  std::vector<NamedTensor> named_tensors() const {
    std::vector<NamedTensor> out;
    for (const auto& spec : encoder_tensor_specs()) {
      out.push_back({std::string(spec.name), tensors_.at(std::string(spec.name))});
    }
    return out;
  }

  /// Deterministic forward pass to the latent mean.
  Embedding encode(const InputTensor& input) const {
    constexpr std::size_t expected = static_cast<std::size_t>(kInputChannels) * kInputSize * kInputSize;
    if (input.values.size() != expected) {
      throw Error(ErrorKind::validation, "encoder input must be 3x64x64");
    }
    std::vector<float> act = input.values;
    int channels = kInputChannels, size = kInputSize;
    for (int layer = 1; layer <= 4; ++layer) {
      const auto prefix = "enc.conv" + std::to_string(layer);
      const auto& w = tensors_.at(prefix + ".w");
      const auto& b = tensors_.at(prefix + ".b");
      act = conv_stride2(act, channels, size, w, b);
      channels = static_cast<int>(w.shape[0]);
      size /= 2;
    }
    const auto& w = tensors_.at("enc.mu.w");
    const auto& b = tensors_.at("enc.mu.b");
    using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMajor> wm(w.values.data(), kLatentDim, static_cast<Eigen::Index>(act.size()));
    Eigen::Map<const Eigen::VectorXf> x(act.data(), static_cast<Eigen::Index>(act.size()));
    Eigen::Map<const Eigen::VectorXf> bias(b.values.data(), kLatentDim);
    Embedding e;
    e.values.resize(kLatentDim);
    Eigen::Map<Eigen::VectorXf>(e.values.data(), kLatentDim) = wm * x + bias;
    return e;
  }

  Embedding encode(const ImagePatch& patch) const { return encode(preprocess(patch)); }

 private:
  // Kernel 4, stride 2, padding 1, then LeakyReLU. Input and output are
  // channel-major; lowered to one matrix product via im2col.
  static std::vector<float> conv_stride2(const std::vector<float>& in, int cin, int size,
                                         const Tensor& w, const Tensor& b) {
    const int cout = static_cast<int>(w.shape[0]);
    const int out_size = size / 2;
    const int patch_len = cin * 16;
    const int positions = out_size * out_size;

    using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor cols = RowMajor::Zero(patch_len, positions);
    for (int c = 0; c < cin; ++c) {
      const float* plane = in.data() + static_cast<std::size_t>(c) * size * size;
      for (int ky = 0; ky < 4; ++ky) {
        for (int kx = 0; kx < 4; ++kx) {
          const int row = (c * 4 + ky) * 4 + kx;
          for (int oy = 0; oy < out_size; ++oy) {
            const int iy = oy * 2 - 1 + ky;
            if (iy < 0 || iy >= size) continue;
            for (int ox = 0; ox < out_size; ++ox) {
              const int ix = ox * 2 - 1 + kx;
              if (ix < 0 || ix >= size) continue;
              cols(row, oy * out_size + ox) = plane[iy * size + ix];
            }
          }
        }
      }
    }
    Eigen::Map<const RowMajor> wm(w.values.data(), cout, patch_len);
    std::vector<float> out(static_cast<std::size_t>(cout) * positions);
    Eigen::Map<RowMajor> om(out.data(), cout, positions);
    om.noalias() = wm * cols;
    for (int o = 0; o < cout; ++o) {
      const float bias = b.values[static_cast<std::size_t>(o)];
      for (int p = 0; p < positions; ++p) {
        float v = om(o, p) + bias;
        om(o, p) = v > 0 ? v : kLeakySlope * v;
      }
    }
    return out;
  }

  std::map<std::string, Tensor> tensors_;
};

}  // namespace signgraph
