#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "kfield/kernel.hpp"
#include "kfield/rkhs.hpp"
#include "kfield/sysid.hpp"

namespace kfield {

/// Versioned text persistence of a learned model. Numbers are written in
/// shortest round-trip form, so load(save(m)) reproduces every entry
/// exactly.
struct ModelFile {
  static constexpr int kVersion = 1;

  KernelSpec kernel;
  PointList centers;
  LinearModel model;
  std::string config_hash;
  std::uint64_t seed = 0;

  Dictionary dictionary() const { return Dictionary(centers, kernel); }
};

void write_model(std::ostream& out, const ModelFile& file);
/// Throws ParseError / SchemaError on malformed input.
ModelFile read_model(std::istream& in);

void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace kfield
