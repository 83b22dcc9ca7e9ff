#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "humancorpus/attributes.hpp"

namespace fixtures {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::random_device rd;
  const auto base = fs::temp_directory_path();
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = base / ("hc-test-" + std::to_string(rd()) + std::to_string(rd()));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
  if (!out) throw std::runtime_error("cannot write " + path);
}

std::vector<AttributeLabel> labels(const std::vector<std::string>& names, double p) {
  std::vector<AttributeLabel> out;
  for (const auto& n : names) {
    const auto a = humancorpus::parse_attribute(n);
    if (!a) throw std::invalid_argument("unknown attribute " + n);
    out.push_back({*a, p});
  }
  return out;
}

namespace {

humancorpus::Attribute nth_attribute(std::size_t i) {
  return humancorpus::all_attributes()[i % humancorpus::kAttributeCount];
}

}  // namespace

std::vector<SampleRecord> boundary_corpus(std::size_t n, const PipelineConfig& cfg,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double side = cfg.min_face_side;
  const double conf = cfg.min_face_conf;
  const double ap = cfg.min_attr_prob;
  const std::vector<double> sides{side - 1, side, std::nextafter(side, 1e9), side + 1, side * 2};
  const std::vector<double> confs{conf - 0.01, conf, std::nextafter(conf, 2.0), 0.995, 1.0};
  const std::vector<double> probs{ap - 0.01, ap, std::nextafter(ap, 2.0), 0.9, 0.99};
  const int k = cfg.min_valid_attrs;
  const std::vector<int> counts{0, k - 1, k, k + 1, k + 3};
  auto pick = [&](const auto& v) { return v[rng() % v.size()]; };

  std::vector<SampleRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SampleRecord r;
    r.id = "b" + std::to_string(i);
    r.image_ref = "img/" + r.id + ".jpg";
    const int faces = static_cast<int>(rng() % 4);  // includes face-less records
    for (int f = 0; f < faces; ++f) {
      humancorpus::FaceDetection d;
      d.bbox = {static_cast<double>(rng() % 50), static_cast<double>(rng() % 50), pick(sides),
                pick(sides)};
      d.conf = pick(confs);
      r.faces.push_back(d);
    }
    const int high = pick(counts);
    const int low = static_cast<int>(rng() % 3);
    const std::size_t offset = rng() % humancorpus::kAttributeCount;
    for (int a = 0; a < high + low; ++a) {
      const double p = a < high ? pick(std::vector<double>{std::nextafter(ap, 2.0), 0.9, 0.99})
                                : pick(probs);
      r.attrs.push_back({nth_attribute(offset + static_cast<std::size_t>(a)), p});
    }
    r.global_caption = "A person in a photograph.";
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SampleRecord> raw_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  static const std::vector<std::string> scenes{
      "A person stands in front of a brick wall on a sunny afternoon.",
      "Someone poses for a portrait in a softly lit studio.",
      "A figure walks along a crowded street holding a coffee cup.",
      "A person sits at a wooden desk beside a large window.",
      "An individual smiles at the camera during an outdoor concert.",
      "A person wearing a coat waits at a train platform in the rain."};
  std::vector<SampleRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SampleRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "r%05zu", i);
    r.id = id;
    r.image_ref = "images/" + r.id + ".jpg";
    r.width = 640;
    r.height = 480;
    const double side = (rng() % 10 == 0) ? 90.0 : 150.0 + static_cast<double>(rng() % 200);
    r.faces.push_back({{static_cast<double>(rng() % 100), static_cast<double>(rng() % 100), side,
                        side * 1.1},
                       (rng() % 20 == 0) ? 0.95 : 0.999});
    const std::size_t count = 4 + rng() % 8;
    const std::size_t offset = rng() % humancorpus::kAttributeCount;
    for (std::size_t a = 0; a < count; ++a) {
      r.attrs.push_back({nth_attribute(offset + a * 3), 0.86 + static_cast<double>(rng() % 14) / 100});
    }
    r.global_caption = scenes[rng() % scenes.size()];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::string> random_docs(std::size_t n, std::size_t max_words, std::size_t vocab,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> docs;
  docs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = rng() % (max_words + 1);
    std::string d;
    for (std::size_t w = 0; w < len; ++w) {
      if (!d.empty()) d += rng() % 7 == 0 ? ", " : " ";
      const auto id = rng() % vocab;
      d += (rng() % 5 == 0 ? "W" : "w") + std::to_string(id);
    }
    if (!d.empty()) d += '.';
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<double> ggd_samples(std::size_t n, double alpha, double sigma2, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(1.0 / alpha, 1.0);
  std::bernoulli_distribution sign(0.5);
  const double beta = std::sqrt(sigma2 * std::tgamma(1.0 / alpha) / std::tgamma(3.0 / alpha));
  std::vector<double> out(n);
  for (auto& x : out) {
    const double mag = beta * std::pow(gamma(rng), 1.0 / alpha);
    x = sign(rng) ? mag : -mag;
  }
  return out;
}

std::vector<double> aggd_samples(std::size_t n, double alpha, double sigma_l, double sigma_r,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(1.0 / alpha, 1.0);
  const double k = std::sqrt(std::tgamma(1.0 / alpha) / std::tgamma(3.0 / alpha));
  const double bl = sigma_l * k, br = sigma_r * k;
  std::bernoulli_distribution left(bl / (bl + br));
  std::vector<double> out(n);
  for (auto& x : out) {
    const double g = std::pow(gamma(rng), 1.0 / alpha);
    x = left(rng) ? -bl * g : br * g;
  }
  return out;
}

humancorpus::GrayImage noise_image(int w, int h, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(128.0, sd);
  std::vector<double> px(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (auto& p : px) p = std::clamp(noise(rng), 0.0, 255.0);
  return humancorpus::make_gray(w, h, std::move(px));
}

}  // namespace fixtures
