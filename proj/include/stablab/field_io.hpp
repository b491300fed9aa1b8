#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "stablab/grid.hpp"

namespace stablab {

/// A node field detached from its grid: enough metadata to rebuild the layout.
struct GridScalarField {
  std::string chart;
  std::array<int, kDim> nodes{};
  Vec spacing{};
  Vec origin{};
  std::vector<double> values;

  bool operator==(const GridScalarField&) const = default;
};

GridScalarField make_field(const StructuredGrid& grid, std::vector<double> values);
/// Wraps a 1D colatitude field; nodes = {n_theta, 1}.
GridScalarField make_field(const AxisymmetricSphere& disc, std::vector<double> values);

// CSV: '#'-prefixed header lines, then one value per line in row-major order.
// Values are printed with 17 significant digits so the round trip is exact.
void write_field_csv(std::ostream& os, const GridScalarField& f);
GridScalarField read_field_csv(std::istream& is);
void save_field_csv(const std::string& path, const GridScalarField& f);
GridScalarField load_field_csv(const std::string& path);

std::string field_to_json(const GridScalarField& f);
GridScalarField field_from_json(const std::string& text);

}  // namespace stablab
