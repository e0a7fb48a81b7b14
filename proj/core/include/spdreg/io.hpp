#pragma once

#include <iosfwd>
#include <string>

#include "spdreg/field.hpp"
#include "spdreg/synth.hpp"

namespace spdreg {

// Text interchange formats. All numbers are written with 17 significant
// digits so a write/read cycle is exact.
//
//   DTF1 <width> <height> <m> <z>
//   <a11 a22 a33 a12 a13 a23>          one line per pixel, row-major
//
//   MSK1 <width> <height>
//   <row of width '0'/'1' characters>  one line per row
//
//   DWI1 <width> <height> <k> <b> <a0>
//   <gx gy gz>                         k direction lines
//   <width values>                     k blocks of height lines each
//
// Readers throw FormatError naming the offending line.

void write_dtf(std::ostream& out, const TensorField& w);
TensorField read_dtf(std::istream& in);
void write_dtf_file(const std::string& path, const TensorField& w);
TensorField read_dtf_file(const std::string& path);

void write_mask(std::ostream& out, const Mask& m);
Mask read_mask(std::istream& in);
void write_mask_file(const std::string& path, const Mask& m);
Mask read_mask_file(const std::string& path);

void write_dwi(std::ostream& out, const DwiSet& d);
DwiSet read_dwi(std::istream& in);
void write_dwi_file(const std::string& path, const DwiSet& d);
DwiSet read_dwi_file(const std::string& path);

/// Writes text to path in binary mode; throws Error on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace spdreg
