// SPDX-License-Identifier: Apache-2.0

// Checkpoint container: "FSCK" magic, config header, every tensor in
// declaration order as little-endian f32, SHA-256 of all preceding bytes as
// the footer. Corruption anywhere flips the hash.

#include "fusestrata/model.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace fusestrata {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are little-endian");

namespace {

constexpr char kMagic[4] = {'F', 'S', 'C', 'K'};
constexpr uint32_t kVersion = 1;

std::array<unsigned char, 32> sha256_bytes(const unsigned char* data, size_t n) {
  std::array<unsigned char, 32> out{};
  unsigned int out_len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data, n) != 1 || EVP_DigestFinal_ex(ctx, out.data(), &out_len) != 1) {
    EVP_MD_CTX_free(ctx);
    fail(Errc::io, "sha256 digest failed");
  }
  EVP_MD_CTX_free(ctx);
  return out;
}

template <class T>
void put(std::string& buf, T v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(const std::string& buf, size_t& pos, const std::string& path) {
  if (pos + sizeof(T) > buf.size()) fail(Errc::parse, path + ": checkpoint truncated");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

void write_checkpoint_file(const std::string& path, const ModelConfig& cfg,
                           const std::vector<CheckpointEntry>& entries) {
  std::string buf;
  buf.append(kMagic, 4);
  put<uint32_t>(buf, kVersion);
  put<int32_t>(buf, cfg.n_modalities);
  put<int32_t>(buf, cfg.nx);
  put<int32_t>(buf, cfg.ny);
  put<int32_t>(buf, cfg.nz);
  put<int32_t>(buf, cfg.depth);
  put<int32_t>(buf, cfg.base_channels);
  put<int32_t>(buf, cfg.kernel);
  put<int32_t>(buf, cfg.embedding_channels);
  put<double>(buf, cfg.dropout_rate);
  put<double>(buf, cfg.bn_eps);
  put<double>(buf, cfg.bn_momentum);
  put<uint32_t>(buf, static_cast<uint32_t>(entries.size()));
  for (const auto& e : entries) {
    put<uint16_t>(buf, static_cast<uint16_t>(e.name.size()));
    buf.append(e.name);
    put<uint8_t>(buf, static_cast<uint8_t>(e.dims.size()));
    for (int d : e.dims) put<int32_t>(buf, d);
    buf.append(reinterpret_cast<const char*>(e.data.data()), e.data.size() * sizeof(float));
  }
  auto digest = sha256_bytes(reinterpret_cast<const unsigned char*>(buf.data()), buf.size());
  buf.append(reinterpret_cast<const char*>(digest.data()), digest.size());

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(Errc::io, "cannot open " + path + " for writing");
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) fail(Errc::io, "short write to " + path);
}

ModelConfig read_checkpoint_file(const std::string& path, std::vector<CheckpointEntry>& entries) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::io, "cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (buf.size() < 4 + 32 || std::memcmp(buf.data(), kMagic, 4) != 0)
    fail(Errc::parse, path + ": not a checkpoint file");
  auto digest = sha256_bytes(reinterpret_cast<const unsigned char*>(buf.data()), buf.size() - 32);
  if (std::memcmp(digest.data(), buf.data() + buf.size() - 32, 32) != 0)
    fail(Errc::parse, path + ": checkpoint hash mismatch (corrupt or truncated)");
  size_t pos = 4;
  uint32_t version = take<uint32_t>(buf, pos, path);
  if (version != kVersion)
    fail(Errc::parse, strprintf("%s: unsupported checkpoint version %u", path.c_str(), version));
  ModelConfig cfg;
  cfg.n_modalities = take<int32_t>(buf, pos, path);
  cfg.nx = take<int32_t>(buf, pos, path);
  cfg.ny = take<int32_t>(buf, pos, path);
  cfg.nz = take<int32_t>(buf, pos, path);
  cfg.depth = take<int32_t>(buf, pos, path);
  cfg.base_channels = take<int32_t>(buf, pos, path);
  cfg.kernel = take<int32_t>(buf, pos, path);
  cfg.embedding_channels = take<int32_t>(buf, pos, path);
  cfg.dropout_rate = take<double>(buf, pos, path);
  cfg.bn_eps = take<double>(buf, pos, path);
  cfg.bn_momentum = take<double>(buf, pos, path);
  uint32_t n = take<uint32_t>(buf, pos, path);
  entries.clear();
  entries.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    CheckpointEntry e;
    uint16_t name_len = take<uint16_t>(buf, pos, path);
    if (pos + name_len > buf.size() - 32) fail(Errc::parse, path + ": checkpoint truncated");
    e.name.assign(buf.data() + pos, name_len);
    pos += name_len;
    uint8_t ndim = take<uint8_t>(buf, pos, path);
    int64_t count = 1;
    for (uint8_t d = 0; d < ndim; ++d) {
      int32_t dim = take<int32_t>(buf, pos, path);
      if (dim <= 0) fail(Errc::parse, path + ": bad tensor dim in checkpoint");
      e.dims.push_back(dim);
      count *= dim;
    }
    if (pos + static_cast<size_t>(count) * sizeof(float) > buf.size() - 32)
      fail(Errc::parse, path + ": checkpoint truncated");
    e.data.resize(static_cast<size_t>(count));
    std::memcpy(e.data.data(), buf.data() + pos, static_cast<size_t>(count) * sizeof(float));
    pos += static_cast<size_t>(count) * sizeof(float);
    entries.push_back(std::move(e));
  }
  if (pos != buf.size() - 32) fail(Errc::parse, path + ": trailing bytes in checkpoint");
  return cfg;
}

}  // namespace fusestrata
