#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dirac/amplitude.hpp"
#include "dirac/core.hpp"
#include "dirac/dynamical.hpp"
#include "dirac/spectral.hpp"

/// Plain comma-separated files with one header line. Numbers are written with
/// 17 significant digits; readers require a uniform first column.
namespace dirac::csv {

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& content);

/// Header plus rows of numbers; columns are looked up by name.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

Table parse_table(const std::string& text, const std::string& source = "<input>");

/// Uniform grid from a column; grid_mismatch when the relative step deviation
/// exceeds 1e-9.
Grid uniform_grid(const std::vector<double>& x, const std::string& source = "<input>");

/// x,re,im
std::string format_function(const SampledFunction& f);
SampledFunction parse_function(const std::string& text, const std::string& source = "<input>");

/// x,t,re_u1,im_u1,re_u2,im_u2
std::string format_field(const WaveField& field);

/// x,re_s,im_s,re_omega,im_omega on [0, 2L] (omega(+0) in the first row)
std::string format_accelerant(const Accelerant& acc);

/// x,p,q,re_v,im_v on the grid of `grid`
std::string format_potential(const DynamicalPotential& pot, const Grid& grid);
/// Reads x,p,q (re_v, im_v are ignored when present) into sampled profiles.
DynamicalPotential parse_potential(const std::string& text, const std::string& source = "<input>");

/// re_z,im_z,re_phi,im_phi,re_phiH,im_phiH,defect
std::string format_weyl(const std::vector<WeylValue>& values);

}  // namespace dirac::csv
