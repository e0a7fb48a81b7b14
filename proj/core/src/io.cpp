#include "spdreg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "spdreg/errors.hpp"

namespace spdreg {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class LineReader {
public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next line split into whitespace-separated tokens. Blank lines are skipped.
  std::vector<std::string> tokens(const char* what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::istringstream ss(line);
      std::vector<std::string> t;
      for (std::string tok; ss >> tok;) t.push_back(tok);
      if (!t.empty()) return t;
    }
    ++line_no_;
    throw FormatError(std::string("unexpected end of file, expected ") + what, line_no_);
  }

  std::string raw_line(const char* what) {
    std::string line;
    if (!std::getline(in_, line)) throw FormatError(std::string("unexpected end of file, expected ") + what, line_no_ + 1);
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  double to_double(const std::string& s) const {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      fail("not a number: '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v)) fail("not a finite number: '" + s + "'");
    return v;
  }

  int to_int(const std::string& s) const {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      fail("not an integer: '" + s + "'");
    }
    if (used != s.size()) fail("not an integer: '" + s + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const { throw FormatError(what, line_no_); }
  int line() const noexcept { return line_no_; }

  void expect_end() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") != std::string::npos) fail("unexpected trailing content");
    }
  }

private:
  std::istream& in_;
  int line_no_ = 0;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return in;
}

template <typename F>
void write_file(const std::string& path, F&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  writer(out);
  out.flush();
  if (!out) throw Error("failed writing " + path);
}

}  // namespace

void write_dtf(std::ostream& out, const TensorField& w) {
  if (w.dim() != 3) throw InvalidInput("DTF1 stores 3x3 tensors only");
  out << "DTF1 " << w.width() << " " << w.height() << " " << w.dim() << " " << num(w.z()) << "\n";
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto c = w[i].mat().coeffs();
    for (std::size_t k = 0; k < c.size(); ++k) out << (k ? " " : "") << num(c[k]);
    out << "\n";
  }
}

TensorField read_dtf(std::istream& in) {
  LineReader r(in);
  const auto head = r.tokens("DTF1 header");
  if (head.size() != 5 || head[0] != "DTF1") r.fail("expected header 'DTF1 <width> <height> <m> <z>'");
  const int width = r.to_int(head[1]);
  const int height = r.to_int(head[2]);
  const int m = r.to_int(head[3]);
  const double z = r.to_double(head[4]);
  if (width < 1 || height < 1) r.fail("field dimensions must be positive");
  if (m != 3) r.fail("only m = 3 is supported");
  if (!(z > 0.0)) r.fail("z must be positive");

  std::vector<SpdTensor> tensors;
  tensors.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int i = 0; i < width * height; ++i) {
    const auto tok = r.tokens("tensor line");
    if (tok.size() != 6) r.fail("expected 6 coefficients, got " + std::to_string(tok.size()));
    std::vector<double> c(6);
    for (std::size_t k = 0; k < 6; ++k) c[k] = r.to_double(tok[k]);
    try {
      tensors.push_back(SpdTensor::certify(SymMat::from_coeffs(3, c), z));
    } catch (const Error& e) {
      r.fail(e.what());
    }
  }
  r.expect_end();
  return TensorField(width, height, std::move(tensors), z);
}

void write_mask(std::ostream& out, const Mask& m) {
  out << "MSK1 " << m.width() << " " << m.height() << "\n";
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) out << (m.at(x, y) ? '1' : '0');
    out << "\n";
  }
}

Mask read_mask(std::istream& in) {
  LineReader r(in);
  const auto head = r.tokens("MSK1 header");
  if (head.size() != 3 || head[0] != "MSK1") r.fail("expected header 'MSK1 <width> <height>'");
  const int width = r.to_int(head[1]);
  const int height = r.to_int(head[2]);
  if (width < 1 || height < 1) r.fail("mask dimensions must be positive");
  std::vector<std::uint8_t> v;
  v.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    const auto tok = r.tokens("mask row");
    if (tok.size() != 1 || tok[0].size() != static_cast<std::size_t>(width))
      r.fail("expected a row of " + std::to_string(width) + " '0'/'1' characters");
    for (char ch : tok[0]) {
      if (ch != '0' && ch != '1') r.fail(std::string("invalid mask character '") + ch + "'");
      v.push_back(ch == '1' ? 1 : 0);
    }
  }
  r.expect_end();
  return Mask(width, height, std::move(v));
}

void write_dwi(std::ostream& out, const DwiSet& d) {
  d.validate();
  out << "DWI1 " << d.width << " " << d.height << " " << d.directions.size() << " " << num(d.b_value) << " "
      << num(d.a0) << "\n";
  for (const Vec3& g : d.directions) out << num(g[0]) << " " << num(g[1]) << " " << num(g[2]) << "\n";
  for (const auto& img : d.images)
    for (int y = 0; y < d.height; ++y) {
      for (int x = 0; x < d.width; ++x)
        out << (x ? " " : "") << num(img[static_cast<std::size_t>(y * d.width + x)]);
      out << "\n";
    }
}

DwiSet read_dwi(std::istream& in) {
  LineReader r(in);
  const auto head = r.tokens("DWI1 header");
  if (head.size() != 6 || head[0] != "DWI1") r.fail("expected header 'DWI1 <width> <height> <k> <b> <a0>'");
  DwiSet d;
  d.width = r.to_int(head[1]);
  d.height = r.to_int(head[2]);
  const int k = r.to_int(head[3]);
  d.b_value = r.to_double(head[4]);
  d.a0 = r.to_double(head[5]);
  if (d.width < 1 || d.height < 1 || k < 1) r.fail("dimensions and direction count must be positive");
  for (int i = 0; i < k; ++i) {
    const auto tok = r.tokens("direction line");
    if (tok.size() != 3) r.fail("expected 'gx gy gz'");
    d.directions.push_back({r.to_double(tok[0]), r.to_double(tok[1]), r.to_double(tok[2])});
  }
  d.images.assign(static_cast<std::size_t>(k), {});
  for (auto& img : d.images) {
    img.reserve(d.pixel_count());
    for (int y = 0; y < d.height; ++y) {
      const auto tok = r.tokens("image row");
      if (tok.size() != static_cast<std::size_t>(d.width))
        r.fail("expected " + std::to_string(d.width) + " values, got " + std::to_string(tok.size()));
      for (const auto& t : tok) img.push_back(r.to_double(t));
    }
  }
  r.expect_end();
  try {
    d.validate();
  } catch (const InvalidInput& e) {
    r.fail(e.what());
  }
  return d;
}

void write_dtf_file(const std::string& path, const TensorField& w) {
  write_file(path, [&](std::ostream& o) { write_dtf(o, w); });
}
TensorField read_dtf_file(const std::string& path) {
  auto in = open_in(path);
  return read_dtf(in);
}
void write_mask_file(const std::string& path, const Mask& m) {
  write_file(path, [&](std::ostream& o) { write_mask(o, m); });
}
Mask read_mask_file(const std::string& path) {
  auto in = open_in(path);
  return read_mask(in);
}
void write_dwi_file(const std::string& path, const DwiSet& d) {
  write_file(path, [&](std::ostream& o) { write_dwi(o, d); });
}
DwiSet read_dwi_file(const std::string& path) {
  auto in = open_in(path);
  return read_dwi(in);
}
void write_text_file(const std::string& path, const std::string& text) {
  write_file(path, [&](std::ostream& o) { o << text; });
}

}  // namespace spdreg
