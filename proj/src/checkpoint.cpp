// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#include "mirrorfield/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

namespace mirrorfield {

namespace {
constexpr char kMagic[8] = {'M', 'R', 'F', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

struct Writer {
  std::ofstream f;
  explicit Writer(const std::string& path) : f(path, std::ios::binary) {
    if (!f) throw IoError("cannot open " + path + " for writing");
  }
  template <typename T>
  void put(T v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const void* p, std::size_t n) {
    f.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
};

struct Reader {
  std::ifstream f;
  std::string path;
  explicit Reader(const std::string& p) : f(p, std::ios::binary), path(p) {
    if (!f) throw IoError("cannot open " + p);
  }
  template <typename T>
  T get() {
    T v;
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw IoError("truncated checkpoint " + path);
    return v;
  }
  void bytes(void* p, std::size_t n) {
    f.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!f) throw IoError("truncated checkpoint " + path);
  }
};

void put_lattice(Writer& w, const Lattice& l) {
  w.put<std::int32_t>(l.nx);
  w.put<std::int32_t>(l.ny);
  w.put<std::int32_t>(l.nz);
  w.put<std::int32_t>(l.channels);
  for (int a = 0; a < 3; ++a) w.put<double>(l.bbox.min[a]);
  for (int a = 0; a < 3; ++a) w.put<double>(l.bbox.max[a]);
  w.bytes(l.data.data(), l.data.size() * sizeof(float));
}

Lattice get_lattice(Reader& r) {
  const std::int32_t nx = r.get<std::int32_t>();
  const std::int32_t ny = r.get<std::int32_t>();
  const std::int32_t nz = r.get<std::int32_t>();
  const std::int32_t c = r.get<std::int32_t>();
  if (nx < 2 || ny < 2 || nz < 2 || c < 1 || nx > 4096 || ny > 4096 ||
      nz > 4096 || c > 64)
    throw IoError("implausible lattice dimensions in " + r.path);
  Aabb box;
  for (int a = 0; a < 3; ++a) box.min[a] = r.get<double>();
  for (int a = 0; a < 3; ++a) box.max[a] = r.get<double>();
  Lattice l(nx, ny, nz, c, box);
  r.bytes(l.data.data(), l.data.size() * sizeof(float));
  return l;
}

void put_floats(Writer& w, const std::vector<float>& v) {
  w.put<std::uint64_t>(v.size());
  w.bytes(v.data(), v.size() * sizeof(float));
}

std::vector<float> get_floats(Reader& r, std::size_t expect) {
  const std::uint64_t n = r.get<std::uint64_t>();
  if (n != expect) throw IoError("optimizer state size mismatch in " + r.path);
  std::vector<float> v(n);
  r.bytes(v.data(), n * sizeof(float));
  return v;
}
}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  namespace fs = std::filesystem;
  const std::string tmp = path + ".tmp";
  {
    Writer w(tmp);
    w.bytes(kMagic, sizeof(kMagic));
    w.put<std::uint32_t>(kVersion);
    const std::string cfg_json = config_to_json(c.config);
    w.put<std::uint64_t>(config_hash(c.config));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg_json.size()));
    w.bytes(cfg_json.data(), cfg_json.size());
    w.put<std::int64_t>(c.step);
    w.put<std::int32_t>(c.params.sh_degree);
    put_lattice(w, c.params.density);
    put_lattice(w, c.params.sh);
    put_lattice(w, c.params.normal);
    put_lattice(w, c.params.reflprob);
    w.put<std::uint8_t>(c.has_optim ? 1 : 0);
    if (c.has_optim) {
      w.put<std::int64_t>(c.optim.step);
      put_floats(w, c.optim.m_density);
      put_floats(w, c.optim.v_density);
      put_floats(w, c.optim.m_sh);
      put_floats(w, c.optim.v_sh);
      put_floats(w, c.optim.m_normal);
      put_floats(w, c.optim.v_normal);
      put_floats(w, c.optim.m_reflprob);
      put_floats(w, c.optim.v_reflprob);
    }
    w.f.flush();
    if (!w.f) throw IoError("failed writing " + tmp);
  }
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError(path + " is not a checkpoint (bad magic)");
  const std::uint32_t version = r.get<std::uint32_t>();
  if (version != kVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version) +
                  " in " + path);
  Checkpoint c;
  c.config_hash = r.get<std::uint64_t>();
  const std::uint32_t cfg_len = r.get<std::uint32_t>();
  if (cfg_len > (1u << 20)) throw IoError("implausible config size in " + path);
  std::string cfg_json(cfg_len, '\0');
  r.bytes(cfg_json.data(), cfg_len);
  c.config = config_from_json(cfg_json);
  if (config_hash(c.config) != c.config_hash)
    throw IoError("checkpoint config hash does not match its config in " + path);
  c.step = r.get<std::int64_t>();
  c.params.sh_degree = r.get<std::int32_t>();
  if (c.params.sh_degree < 0 || c.params.sh_degree > 2)
    throw IoError("unsupported radiance degree in " + path);
  c.params.density = get_lattice(r);
  c.params.sh = get_lattice(r);
  c.params.normal = get_lattice(r);
  c.params.reflprob = get_lattice(r);
  const int nb = (c.params.sh_degree + 1) * (c.params.sh_degree + 1);
  if (c.params.density.channels != 1 || c.params.sh.channels != 3 * nb ||
      c.params.normal.channels != 3 || c.params.reflprob.channels != 1)
    throw IoError("lattice channel counts are inconsistent in " + path);
  c.has_optim = r.get<std::uint8_t>() != 0;
  if (c.has_optim) {
    c.optim.step = r.get<std::int64_t>();
    c.optim.m_density = get_floats(r, c.params.density.size());
    c.optim.v_density = get_floats(r, c.params.density.size());
    c.optim.m_sh = get_floats(r, c.params.sh.size());
    c.optim.v_sh = get_floats(r, c.params.sh.size());
    c.optim.m_normal = get_floats(r, c.params.normal.size());
    c.optim.v_normal = get_floats(r, c.params.normal.size());
    c.optim.m_reflprob = get_floats(r, c.params.reflprob.size());
    c.optim.v_reflprob = get_floats(r, c.params.reflprob.size());
  }
  return c;
}

}  // namespace mirrorfield
