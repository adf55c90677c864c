// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include "mgs/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "mgs/errors.hpp"

namespace mgs {
namespace {

static_assert(std::numeric_limits<double>::is_iec559 && std::numeric_limits<float>::is_iec559);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

 private:
  void le(std::uint64_t v, int bytes) {
    char buf[8];
    for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf, bytes);
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t le(int bytes) {
    unsigned char buf[8];
    in_.read(reinterpret_cast<char*>(buf), bytes);
    if (in_.gcount() != bytes) {
      fail(ErrorCode::kParse, "checkpoint truncated at byte " + std::to_string(offset_));
    }
    offset_ += bytes;
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

}  // namespace

void write_checkpoint(std::ostream& out, const SplatModel& model) {
  Writer w(out);
  out.write("MGS1", 4);
  w.u32(kCheckpointVersion);
  w.u32(model.width);
  w.u32(model.height);
  w.u64(model.size());
  for (float b : model.background) w.f32(b);
  w.u8(model.criterion.tag());
  for (const Splat& s : model.splats) {
    w.u64(s.id);
    w.f64(s.mu[0]);
    w.f64(s.mu[1]);
    w.f64(s.log_scale[0]);
    w.f64(s.log_scale[1]);
    w.f64(s.theta);
    w.f64(s.opacity_raw);
    for (double c : s.color_raw) w.f64(c);
    w.f64(s.depth);
  }
  if (!out) fail(ErrorCode::kIo, "failed to write checkpoint");
}

void write_checkpoint(const std::filesystem::path& path, const SplatModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  write_checkpoint(out, model);
}

SplatModel read_checkpoint(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "MGS1", 4) != 0) {
    fail(ErrorCode::kParse, "not an MGS1 checkpoint (bad magic)");
  }
  Reader r(in);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    fail(ErrorCode::kParse, "unsupported checkpoint version " + std::to_string(version));
  }
  SplatModel model;
  model.width = r.u32();
  model.height = r.u32();
  const std::uint64_t n = r.u64();
  for (float& b : model.background) b = r.f32();
  const std::uint8_t tag = r.u8();
  const auto criterion = OrderingCriterion::from_tag(tag);
  if (!criterion) fail(ErrorCode::kParse, "unknown criterion tag " + std::to_string(tag));
  model.criterion = *criterion;
  // Guard the allocation against corrupt counts.
  if (n > (std::uint64_t{1} << 32)) fail(ErrorCode::kParse, "implausible splat count " + std::to_string(n));
  model.splats.reserve(static_cast<std::size_t>(n));
  for (std::uint64_t i = 0; i < n; ++i) {
    Splat s;
    s.id = r.u64();
    s.mu = {r.f64(), r.f64()};
    s.log_scale = {r.f64(), r.f64()};
    s.theta = r.f64();
    s.opacity_raw = r.f64();
    s.color_raw = {r.f64(), r.f64(), r.f64()};
    s.depth = r.f64();
    model.splats.push_back(s);
  }
  try {
    validate(model);
  } catch (const Error& e) {
    fail(ErrorCode::kParse, std::string("checkpoint holds an invalid model: ") + e.what());
  }
  return model;
}

SplatModel read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace mgs
