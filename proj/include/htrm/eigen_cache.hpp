#pragma once

// Binary store for per-trial spectra.
//
// Layout, all integers and floats little-endian:
//   magic "HTRMEIG1" | u32 version | u32 kind | i32 n | i32 m | i32 l | f64 alpha | f64 sigma
//   | u64 master_seed | u32 tag length | tag bytes | u64 trials | u32 record length
//   | trials * record length f64 eigenvalues (each record ascending)
//
// A file is only used when every header field equals the request; anything
// else raises CacheMismatch and the caller regenerates.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ensembles.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace htrm {

struct EigenCacheHeader {
  static constexpr std::uint32_t kVersion = 1;
  EnsembleSpec spec;
  std::uint64_t master_seed = 0;
  std::string stream_tag;
  std::uint64_t trials = 0;

  bool operator==(const EigenCacheHeader&) const = default;
};

namespace detail {

inline constexpr char kEigenMagic[8] = {'H', 'T', 'R', 'M', 'E', 'I', 'G', '1'};

template <class T>
void put_le(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  static_assert(sizeof(T) == sizeof(U));
  const U bits = std::bit_cast<U>(value);
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(bytes, sizeof(U));
}

template <class T>
T get_le(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  unsigned char bytes[sizeof(U)] = {};
  in.read(reinterpret_cast<char*>(bytes), sizeof(U));
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace detail

/// File name that spreads different requests over different files.
inline std::string eigen_cache_name(const EigenCacheHeader& h) {
  std::ostringstream key;
  key << to_string(h.spec.kind) << '|' << h.spec.n << '|' << h.spec.m << '|' << h.spec.l << '|'
      << std::bit_cast<std::uint64_t>(h.spec.alpha) << '|' << std::bit_cast<std::uint64_t>(h.spec.sigma) << '|'
      << h.master_seed << '|' << h.stream_tag << '|' << h.trials;
  std::ostringstream name;
  name << to_string(h.spec.kind) << "-n" << h.spec.n << "-" << std::hex << fnv1a64(key.str()) << ".eig";
  return name.str();
}

inline void write_eigen_cache(const std::filesystem::path& file, const EigenCacheHeader& h,
                              const std::vector<std::vector<double>>& spectra) {
  using detail::put_le;
  if (spectra.size() != h.trials) throw std::invalid_argument("write_eigen_cache: trial count mismatch");
  const auto record = static_cast<std::uint32_t>(h.spec.spectrum_size());
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  // write to a private name, then rename: concurrent writers leave one complete file
  const auto tmp = file.string() + ".tmp" + std::to_string(reinterpret_cast<std::uintptr_t>(&spectra));
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.write(detail::kEigenMagic, sizeof(detail::kEigenMagic));
    put_le(out, EigenCacheHeader::kVersion);
    put_le(out, static_cast<std::uint32_t>(h.spec.kind));
    put_le(out, static_cast<std::int32_t>(h.spec.n));
    put_le(out, static_cast<std::int32_t>(h.spec.m));
    put_le(out, static_cast<std::int32_t>(h.spec.l));
    put_le(out, h.spec.alpha);
    put_le(out, h.spec.sigma);
    put_le(out, h.master_seed);
    put_le(out, static_cast<std::uint32_t>(h.stream_tag.size()));
    out.write(h.stream_tag.data(), static_cast<std::streamsize>(h.stream_tag.size()));
    put_le(out, h.trials);
    put_le(out, record);
    for (const auto& s : spectra) {
      if (s.size() != record) throw std::invalid_argument("write_eigen_cache: record length mismatch");
      for (double v : s) put_le(out, v);
    }
    if (!out) throw std::runtime_error("short write to " + tmp);
  }
  std::filesystem::rename(tmp, file);
}

/// Reads spectra stored for exactly this header; throws CacheMismatch otherwise.
inline std::vector<std::vector<double>> read_eigen_cache(const std::filesystem::path& file,
                                                         const EigenCacheHeader& expected) {
  using detail::get_le;
  std::ifstream in(file, std::ios::binary);
  if (!in) throw CacheMismatch("no cache file " + file.string());
  char magic[sizeof(detail::kEigenMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, detail::kEigenMagic, sizeof(magic)) != 0) {
    throw CacheMismatch(file.string() + ": not an eigenvalue cache");
  }
  if (get_le<std::uint32_t>(in) != EigenCacheHeader::kVersion) throw CacheMismatch(file.string() + ": format version");
  EigenCacheHeader h;
  h.spec.kind = static_cast<EnsembleKind>(get_le<std::uint32_t>(in));
  h.spec.n = get_le<std::int32_t>(in);
  h.spec.m = get_le<std::int32_t>(in);
  h.spec.l = get_le<std::int32_t>(in);
  h.spec.alpha = get_le<double>(in);
  h.spec.sigma = get_le<double>(in);
  h.master_seed = get_le<std::uint64_t>(in);
  const auto tag_len = get_le<std::uint32_t>(in);
  if (!in || tag_len > 4096) throw CacheMismatch(file.string() + ": corrupt header");
  h.stream_tag.resize(tag_len);
  in.read(h.stream_tag.data(), tag_len);
  h.trials = get_le<std::uint64_t>(in);
  const auto record = get_le<std::uint32_t>(in);
  if (!in || !(h == expected) || record != static_cast<std::uint32_t>(expected.spec.spectrum_size())) {
    throw CacheMismatch(file.string() + ": header does not match the requested run");
  }
  std::vector<std::vector<double>> spectra(h.trials, std::vector<double>(record));
  for (auto& s : spectra) {
    for (double& v : s) v = get_le<double>(in);
  }
  if (!in) throw CacheMismatch(file.string() + ": truncated");
  return spectra;
}

}  // namespace htrm
