#include "checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cvt {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error("checkpoint: truncated file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

float get_f32(std::istream& in) {
  std::uint32_t bits = get_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  std::uint32_t n = get_u32(in);
  if (n > (1u << 20)) throw std::runtime_error("checkpoint: implausible string length");
  std::string s(n, '\0');
  if (!in.read(s.data(), n)) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

void write_body(std::ostream& out, const std::string& descriptor,
                const std::vector<std::pair<std::string, Tensor>>& tensors) {
  out.write("A3CX", 4);
  put_u32(out, kCheckpointVersion);
  put_string(out, descriptor);
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    put_string(out, name);
    put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : t.data) put_f32(out, static_cast<float>(v));
  }
}

struct RawCheckpoint {
  std::string descriptor;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

RawCheckpoint read_body(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "A3CX", 4) != 0)
    throw std::runtime_error("checkpoint: bad magic");
  std::uint32_t version = get_u32(in);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  RawCheckpoint raw;
  raw.descriptor = get_string(in);
  std::uint32_t count = get_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = get_string(in);
    std::uint32_t rank = get_u32(in);
    if (rank > 8) throw std::runtime_error("checkpoint: implausible tensor rank");
    std::vector<int> shape(rank);
    std::size_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      shape[r] = static_cast<int>(get_u32(in));
      n *= static_cast<std::size_t>(shape[r]);
    }
    if (n > (1u << 26)) throw std::runtime_error("checkpoint: implausible tensor size");
    Tensor t(shape);
    for (std::size_t k = 0; k < n; ++k) t.data[k] = get_f32(in);
    raw.tensors.emplace_back(std::move(name), std::move(t));
  }
  return raw;
}

void atomic_write(const std::string& path, const std::string& descriptor,
                  const std::vector<std::pair<std::string, Tensor>>& tensors) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + tmp);
    write_body(out, descriptor, tensors);
    if (!out) throw std::runtime_error("checkpoint: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("checkpoint: rename failed for " + path);
}

}  // namespace

void save_checkpoint(const ParameterSet& params, const std::string& path) {
  atomic_write(path, params.desc.to_text(), params.tensors);
}

ParameterSet load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  RawCheckpoint raw = read_body(in);

  ParameterSet p;
  p.desc = NetDescriptor::from_text(raw.descriptor);
  p.tensors = std::move(raw.tensors);

  // Shape consistency against the descriptor; reject rather than return a
  // partially valid set.
  ParameterSet expected = zero_params(p.desc);
  if (expected.tensors.size() != p.tensors.size())
    throw std::runtime_error("checkpoint: tensor count inconsistent with descriptor");
  for (std::size_t i = 0; i < p.tensors.size(); ++i) {
    if (p.tensors[i].first != expected.tensors[i].first ||
        p.tensors[i].second.shape != expected.tensors[i].second.shape)
      throw std::runtime_error("checkpoint: tensor " + p.tensors[i].first +
                               " inconsistent with descriptor");
  }
  return p;
}

void save_linear_mapper(const LinearMapper& mapper, const std::string& path) {
  Tensor w({mapper.dim, mapper.dim + 1});
  for (int r = 0; r < mapper.dim; ++r)
    for (int c = 0; c <= mapper.dim; ++c) w[r * (mapper.dim + 1) + c] = mapper.weights(r, c);
  atomic_write(path, "mapper", {{"mapper.W", std::move(w)}});
}

LinearMapper load_linear_mapper(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  RawCheckpoint raw = read_body(in);
  if (raw.descriptor != "mapper" || raw.tensors.size() != 1 ||
      raw.tensors[0].first != "mapper.W")
    throw std::runtime_error("checkpoint: not a mapper file: " + path);
  const Tensor& w = raw.tensors[0].second;
  if (w.shape.size() != 2 || w.shape[1] != w.shape[0] + 1)
    throw std::runtime_error("checkpoint: mapper.W has the wrong shape");
  LinearMapper m;
  m.dim = w.shape[0];
  m.weights.resize(m.dim, m.dim + 1);
  for (int r = 0; r < m.dim; ++r)
    for (int c = 0; c <= m.dim; ++c) m.weights(r, c) = w[r * (m.dim + 1) + c];
  return m;
}

ParameterSet quantize_to_f32(const ParameterSet& params) {
  ParameterSet q = params;
  for (auto& [name, t] : q.tensors)
    for (double& v : t.data) v = static_cast<double>(static_cast<float>(v));
  return q;
}

}  // namespace cvt
