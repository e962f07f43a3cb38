#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "radmax/profile.hpp"

namespace radmax {

struct DecreasingTent {
  double height = 1.0;
  double radius = 1.0;
};
struct DecreasingExponential {
  double scale = 0.4;
  double radius = 2.0;
};
struct AnnularBump {
  double center = 1.0;
  double width = 0.3;
  double height = 1.0;
};
struct MultiBump {
  int count = 3;
  std::uint64_t seed = 7;
};
struct Oscillating {
  double frequency = 6.0;
  double damping = 1.0;
  double radius = 2.0;
};
struct FarThinBump {
  double distance = 1.6;
  double width = 0.05;
  double height = 1.0;
};

using FamilySpec = std::variant<DecreasingTent, DecreasingExponential, AnnularBump, MultiBump,
                                Oscillating, FarThinBump>;

struct CorpusSpec {
  int dimension = 2;
  std::vector<FamilySpec> families;
  /// Knots used to discretize smooth shapes.
  int resolution = 48;
  std::uint64_t seed = 1;
};

struct CorpusItem {
  std::string id;
  std::string family;
  bool radially_decreasing;
  RadialProfile profile;
};

std::string family_name(const FamilySpec& f);

/// Deterministic profiles from the spec; throws std::invalid_argument on bad
/// parameters.
std::vector<CorpusItem> corpus_generate(const CorpusSpec& spec);

/// Ten families covering every shape, used by the default configuration.
std::vector<FamilySpec> default_families();

}  // namespace radmax
