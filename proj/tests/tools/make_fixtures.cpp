// Regenerates the checked-in binary fixtures: prototype images for the
// shipped catalogues, the seeded encoder weight file, golden input images and
// the golden embeddings computed by the scalar oracle. Deterministic; rerun
// only when a fixture format changes.
//
//   make_fixtures <fixtures-dir>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "oracle/scalar_encoder.hpp"
#include "signgraph/detail/rng.hpp"
#include "signgraph/golden.hpp"
#include "signgraph/knowledge_graph.hpp"
#include "signgraph/render.hpp"
#include "signgraph/sign_document.hpp"
#include "signgraph/weights.hpp"

namespace fs = std::filesystem;
using namespace signgraph;

namespace {

void write_file(const fs::path& path, const std::string& bytes) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<SignPrototype> read_signs(const fs::path& path) {
  std::ifstream in(path);
  std::vector<SignPrototype> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(parse_sign_line(line, VocabularySet::defaults()));
  }
  return out;
}

void render_catalogue(const fs::path& dir) {
  for (const auto& s : read_signs(dir / "signs.jsonl")) {
    auto path = dir / s.prototype_image_color;
    fs::create_directories(path.parent_path());
    save_png(render_prototype(s), path);
  }
}

std::vector<NamedTensor> fixture_weights(std::uint64_t seed) {
  detail::SplitMix64 rng(seed);
  std::vector<NamedTensor> out;
  for (const auto& spec : encoder_tensor_specs()) {
    Tensor t = Tensor::zeros(spec.shape);
    const std::string name(spec.name);
    if (name.rfind("enc.logvar", 0) == 0) {
      out.push_back({name, std::move(t)});
      continue;
    }
    const bool bias = name.size() > 2 && name.substr(name.size() - 2) == ".b";
    double fan_in = 1;
    for (std::size_t i = 1; i < spec.shape.size(); ++i) fan_in *= spec.shape[i];
    const double bound = bias ? 0.05 : std::sqrt(6.0 / fan_in);
    for (auto& v : t.values) v = static_cast<float>(rng.uniform(-bound, bound));
    out.push_back({name, std::move(t)});
  }
  // A small decoder tensor, as a trainer export would carry; loaders skip it.
  Tensor dec = Tensor::zeros({8, 4});
  for (auto& v : dec.values) v = static_cast<float>(rng.uniform(-1, 1));
  out.push_back({"dec.fc.w", std::move(dec)});
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <fixtures-dir>\n";
    return 2;
  }
  const fs::path root = argv[1];
  fs::create_directories(root / "golden");

  write_file(root / "vocabulary.txt", VocabularySet::defaults().render_schema());
  render_catalogue(root / "us");
  render_catalogue(root / "de");

  const auto tensors = fixture_weights(20240601);
  write_file(root / "weights" / "encoder.vpe1", serialize_weights(tensors));

  // Golden inputs span the accepted patch sizes (15 to 250 pixels).
  const auto us = read_signs(root / "us" / "signs.jsonl");
  auto find = [&](const std::string& id) {
    for (const auto& s : us)
      if (s.id == id) return s;
    throw std::runtime_error("no sign " + id);
  };
  std::vector<std::pair<std::string, ImagePatch>> inputs;
  inputs.emplace_back("stop-prototype", render_prototype(find("R1-1")));
  inputs.emplace_back("pedestrian-field-15", field_patch(render_prototype(find("W11-2")), 7, 15, 15));
  inputs.emplace_back("speed-field-37", field_patch(render_prototype(find("R2-1-30")), 11, 37, 37));
  {
    auto big = render_prototype(find("M1-1"), 128);
    inputs.emplace_back("route-crop-100x80", crop(big, BoundingBox{14, 24, 100, 80}));
  }
  {
    ImagePatch noise(250, 250);
    detail::SplitMix64 rng(99);
    for (auto& p : noise.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    inputs.emplace_back("noise-250", noise);
  }
  inputs.emplace_back("flat-gray-128", ImagePatch(128, 128, 128));

  const auto weights = oracle::tensor_map(tensors);
  std::string golden;
  for (auto& [name, patch] : inputs) {
    patch.source_bbox.reset();
    save_png(patch, root / "golden" / (name + ".png"));
    GoldenEntry g;
    g.name = name;
    g.input_crc = pixel_crc(patch);
    g.values = oracle::encode(weights, oracle::preprocess(patch));
    golden += render_golden_line(g) + "\n";
  }
  write_file(root / "golden" / "golden.txt", golden);

  // The same 15x15 patch as raw RGB with explicit dimensions.
  const auto& small = inputs[1].second;
  write_file(root / "patches" / "pedestrian.15x15.rgb",
             std::string(reinterpret_cast<const char*>(small.pixels.data()), small.pixels.size()));
  save_png(small, root / "patches" / "pedestrian-15.png");

  std::cout << "fixtures written to " << root.string() << "\n";
  return 0;
}
