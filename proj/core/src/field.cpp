#include "spdreg/field.hpp"

#include <algorithm>
#include <atomic>
#include <string>

#include "spdreg/errors.hpp"
#include "spdreg/parallel.hpp"

namespace spdreg {
namespace {

std::atomic<int> g_max_threads{1};

void check_dims(int width, int height) {
  if (width < 1 || height < 1)
    throw InvalidInput("field dimensions must be positive, got " + std::to_string(width) + "x" +
                       std::to_string(height));
}

}  // namespace

void set_max_threads(int n) { g_max_threads.store(std::max(1, n)); }
int max_threads() { return g_max_threads.load(); }

TensorField::TensorField(int width, int height, double z, int dim)
    : width_(width), height_(height), z_(z) {
  check_dims(width, height);
  if (!(z > 0.0)) throw InvalidInput("log bound z must be positive");
  tensors_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                  spd_identity(dim));
}

TensorField::TensorField(int width, int height, std::vector<SpdTensor> tensors, double z)
    : width_(width), height_(height), z_(z), tensors_(std::move(tensors)) {
  check_dims(width, height);
  if (!(z > 0.0)) throw InvalidInput("log bound z must be positive");
  if (tensors_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw InvalidInput("tensor count does not match field dimensions");
  for (const SpdTensor& t : tensors_) {
    if (t.log_bound() > z + 1e-9) throw DomainError("tensor log-norm exceeds the field bound");
    if (t.dim() != tensors_.front().dim()) throw InvalidInput("mixed tensor dimensions in field");
  }
}

void TensorField::set(std::size_t i, SpdTensor t) {
  if (t.log_bound() > z_ + 1e-9) throw DomainError("tensor log-norm exceeds the field bound");
  if (t.dim() != dim()) throw InvalidInput("tensor dimension does not match field");
  tensors_.at(i) = std::move(t);
}

SymField::SymField(int width, int height, int dim)
    : width_(width), height_(height), dim_(dim),
      c_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * SymMat::coeff_count(dim), 0.0) {
  check_dims(width, height);
}

void SymField::set(std::size_t i, const SymMat& m) {
  if (m.dim() != dim_) throw InvalidInput("matrix dimension does not match field");
  std::copy(m.coeffs().begin(), m.coeffs().end(), pixel(i).begin());
}

Mask::Mask(int width, int height)
    : width_(width), height_(height), v_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 1) {
  check_dims(width, height);
}

Mask::Mask(int width, int height, std::vector<std::uint8_t> present)
    : width_(width), height_(height), v_(std::move(present)) {
  check_dims(width, height);
  if (v_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw InvalidInput("mask size does not match its dimensions");
  for (auto& b : v_) b = b ? 1 : 0;
}

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count(v_.begin(), v_.end(), std::uint8_t{1}));
}

void Mask::require_nonempty() const {
  if (count() == 0) throw InvalidInput("mask has no data pixels");
}

SymField to_log_coords(const TensorField& w) {
  SymField l(w.width(), w.height(), w.dim());
  parallel_for(w.size(), [&](std::size_t i) { l.set(i, mat_log(w[i])); });
  return l;
}

TensorField from_log_coords(const SymField& l, double z, double eps) {
  std::vector<SpdTensor> out(l.size());
  parallel_for(l.size(), [&](std::size_t i) {
    const SymMat projected = project_log_coords(l.at(i), eps, z);
    SpdTensor t = mat_exp(projected);
    out[i] = t.with_bound(std::min(t.log_bound(), z));
  });
  return TensorField(l.width(), l.height(), std::move(out), z);
}

SymField to_raw_coords(const TensorField& w) {
  SymField c(w.width(), w.height(), w.dim());
  for (std::size_t i = 0; i < w.size(); ++i) c.set(i, w[i].mat());
  return c;
}

TensorField from_raw_coords(const SymField& c, double z, double eps) {
  std::vector<SpdTensor> out(c.size());
  parallel_for(c.size(), [&](std::size_t i) { out[i] = project_full(c.at(i), eps, z); });
  return TensorField(c.width(), c.height(), std::move(out), z);
}

void require_same_shape(const TensorField& a, const TensorField& b) {
  if (a.width() != b.width() || a.height() != b.height() || a.dim() != b.dim())
    throw InvalidInput("field dimensions differ: " + std::to_string(a.width()) + "x" +
                       std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                       std::to_string(b.height()));
}

void require_same_shape(const TensorField& a, const Mask& m) {
  if (a.width() != m.width() || a.height() != m.height())
    throw InvalidInput("mask dimensions " + std::to_string(m.width()) + "x" + std::to_string(m.height()) +
                       " do not match field " + std::to_string(a.width()) + "x" +
                       std::to_string(a.height()));
}

}  // namespace spdreg
