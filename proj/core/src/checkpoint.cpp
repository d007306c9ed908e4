#include "cadet/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "cadet/errors.hpp"

namespace cadet {

namespace {

constexpr char kMagic[8] = {'C', 'A', 'D', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint i/o assumes a little-endian host");

template <typename T>
void write_pod(std::ofstream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is, const std::string& path) {
  T value;
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw ParseError("truncated checkpoint file: " + path);
  return value;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::map<std::string, Tensor>& tensors) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("cannot open checkpoint file for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  write_pod(os, kVersion);
  write_pod(os, static_cast<std::uint64_t>(tensors.size()));
  for (const auto& [key, tensor] : tensors) {
    if (!tensor.defined()) throw ValidationError("undefined tensor for key '" + key + "'");
    write_pod(os, static_cast<std::uint32_t>(key.size()));
    os.write(key.data(), static_cast<std::streamsize>(key.size()));
    write_pod(os, static_cast<std::uint32_t>(tensor.ndim()));
    for (int i = 0; i < tensor.ndim(); ++i) write_pod(os, static_cast<std::uint32_t>(tensor.dim(i)));
    os.write(reinterpret_cast<const char*>(tensor.values().data()),
             static_cast<std::streamsize>(tensor.values().size() * sizeof(double)));
  }
  if (!os) throw ValidationError("write failed for checkpoint file: " + path);
}

std::map<std::string, Tensor> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open checkpoint file: " + path);
  char magic[sizeof(kMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("not a checkpoint file: " + path);
  }
  const auto version = read_pod<std::uint32_t>(is, path);
  if (version != kVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version) + ": " + path);
  }
  const auto count = read_pod<std::uint64_t>(is, path);
  std::map<std::string, Tensor> tensors;
  for (std::uint64_t e = 0; e < count; ++e) {
    const auto key_len = read_pod<std::uint32_t>(is, path);
    std::string key(key_len, '\0');
    is.read(key.data(), key_len);
    if (!is) throw ParseError("truncated checkpoint file: " + path);
    const auto ndim = read_pod<std::uint32_t>(is, path);
    if (ndim == 0 || ndim > 8) throw ParseError("bad tensor rank in checkpoint: " + path);
    Shape shape(ndim);
    std::int64_t numel = 1;
    for (auto& d : shape) {
      const auto extent = read_pod<std::uint32_t>(is, path);
      if (extent == 0) throw ParseError("zero tensor extent in checkpoint: " + path);
      d = static_cast<int>(extent);
      numel *= d;
    }
    std::vector<double> data(static_cast<std::size_t>(numel));
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!is) throw ParseError("truncated checkpoint file: " + path);
    if (!tensors.emplace(std::move(key), Tensor(std::move(shape), std::move(data))).second) {
      throw ParseError("duplicate key in checkpoint: " + path);
    }
  }
  return tensors;
}

}  // namespace cadet
