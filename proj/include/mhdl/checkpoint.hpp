#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <optional>

#include "mhdl/eulerian.hpp"

namespace mhdl {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class SolverTag : std::uint32_t { Lagrangian = 0, Eulerian = 1 };

struct Checkpoint {
  Grid grid;
  double time = 0;
  SolverTag tag = SolverTag::Lagrangian;
  std::optional<FlowState> lagrangian;
  std::optional<EulerState> eulerian;
};

namespace ckpt {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

inline void put_u32(std::string& out, std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); }
inline void put_f64(std::string& out, double v) { out.append(reinterpret_cast<const char*>(&v), 8); }
inline void put_array(std::string& out, const RealArray& a) {
  out.append(reinterpret_cast<const char*>(a.data()), a.size() * sizeof(double));
}

class Reader {
 public:
  explicit Reader(const std::string& buf) : buf_(buf) {}
  void need(std::size_t n, const char* what) const {
    if (pos_ + n > buf_.size())
      throw FormatError(std::string("checkpoint truncated while reading ") + what + " (have " +
                        std::to_string(buf_.size() - pos_) + " bytes, need " + std::to_string(n) + ")");
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v;
    std::memcpy(&v, buf_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }
  double f64(const char* what) {
    need(8, what);
    double v;
    std::memcpy(&v, buf_.data() + pos_, 8);
    pos_ += 8;
    return v;
  }
  void array(RealArray& a, const char* what) {
    need(a.size() * 8, what);
    std::memcpy(a.data(), buf_.data() + pos_, a.size() * 8);
    pos_ += a.size() * 8;
  }
  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  const std::string& buf_;
  std::size_t pos_ = 0;
};

inline std::string header(const Grid& g, double t, SolverTag tag) {
  std::string out = "MHDL";
  put_u32(out, kCheckpointVersion);
  put_u32(out, std::uint32_t(g.dim()));
  for (int a = 0; a < g.dim(); ++a) put_u32(out, std::uint32_t(g.size(a)));
  for (int a = 0; a < g.dim(); ++a) put_f64(out, g.length(a));
  put_f64(out, t);
  put_u32(out, std::uint32_t(tag));
  return out;
}

inline void write_file(const std::string& path, const std::string& data) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + tmp + "' for writing");
    f.write(data.data(), std::streamsize(data.size()));
    if (!f) throw Error("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("cannot rename '" + tmp + "' to '" + path + "'");
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for reading");
  return std::string(std::istreambuf_iterator<char>(f), {});
}

}  // namespace ckpt

inline std::string serialize_checkpoint(const FlowState& s) {
  std::string out = ckpt::header(s.grid(), s.t, SolverTag::Lagrangian);
  for (const auto& c : s.Y.c) ckpt::put_array(out, c);
  for (const auto& c : s.Yt.c) ckpt::put_array(out, c);
  return out;
}

inline std::string serialize_checkpoint(const EulerState& s) {
  std::string out = ckpt::header(s.grid(), s.t, SolverTag::Eulerian);
  for (const auto& c : s.u.c) ckpt::put_array(out, c);
  for (const auto& c : s.b.c) ckpt::put_array(out, c);
  ckpt::put_array(out, s.p.v);
  return out;
}

inline Checkpoint deserialize_checkpoint(const std::string& buf) {
  ckpt::Reader r(buf);
  if (r.bytes(4, "magic") != "MHDL") throw FormatError("bad checkpoint magic");
  const std::uint32_t ver = r.u32("version");
  if (ver != kCheckpointVersion) throw FormatError("unsupported checkpoint version " + std::to_string(ver));
  const std::uint32_t dim = r.u32("dimension");
  if (dim != 2 && dim != 3) throw FormatError("bad checkpoint dimension " + std::to_string(dim));
  std::array<int, 3> n{1, 1, 1};
  std::array<double, 3> L{1, 1, 1};
  for (std::uint32_t a = 0; a < dim; ++a) {
    const std::uint32_t v = r.u32("sizes");
    if (v < 4 || v > (1u << 16) || (v & (v - 1)) != 0) throw FormatError("bad checkpoint grid size " + std::to_string(v));
    n[a] = int(v);
  }
  for (std::uint32_t a = 0; a < dim; ++a) {
    L[a] = r.f64("lengths");
    if (!(L[a] > 0) || !std::isfinite(L[a])) throw FormatError("bad checkpoint length");
  }
  const double t = r.f64("time");
  const std::uint32_t tag = r.u32("solver tag");
  if (tag > 1) throw FormatError("bad checkpoint solver tag " + std::to_string(tag));
  const Grid g(int(dim), n, L);
  const std::size_t np = g.num_points();
  const std::size_t arrays = tag == 0 ? 2 * dim : 2 * dim + 1;
  if (r.remaining() != arrays * np * 8)
    throw FormatError("checkpoint payload has " + std::to_string(r.remaining()) + " bytes, header declares " +
                      std::to_string(arrays * np * 8));
  Checkpoint c{g, t, SolverTag(tag), std::nullopt, std::nullopt};
  if (tag == 0) {
    FlowState s = FlowState::zero(g);
    for (auto& a : s.Y.c) r.array(a, "Y");
    for (auto& a : s.Yt.c) r.array(a, "Yt");
    s.t = t;
    c.lagrangian = std::move(s);
  } else {
    EulerState s{VectorField(g), VectorField(g), ScalarField(g), t};
    for (auto& a : s.u.c) r.array(a, "u");
    for (auto& a : s.b.c) r.array(a, "b");
    r.array(s.p.v, "p");
    c.eulerian = std::move(s);
  }
  return c;
}

inline void write_checkpoint(const std::string& path, const FlowState& s) {
  ckpt::write_file(path, serialize_checkpoint(s));
}
inline void write_checkpoint(const std::string& path, const EulerState& s) {
  ckpt::write_file(path, serialize_checkpoint(s));
}
inline Checkpoint read_checkpoint(const std::string& path) { return deserialize_checkpoint(ckpt::read_file(path)); }

}  // namespace mhdl
