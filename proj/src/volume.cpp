// SPDX-License-Identifier: Apache-2.0
#include "fusestrata/volume.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace fusestrata {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "volume I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'M', 'M', 'F', 'V'};
constexpr uint32_t kVersion = 1;

uint32_t read_u32(std::istream& in, const std::string& path, const char* what) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) fail(Errc::parse, path + ": truncated header (" + what + ")");
  return v;
}

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

}  // namespace

void Dataset::validate() const {
  if (subjects.empty()) fail(Errc::validation, "dataset has no subjects");
  for (const auto& s : subjects) {
    if (s.volumes.size() != modalities.size())
      fail(Errc::validation, "subject " + s.subject_id + ": modality set mismatch");
    for (const auto& vol : s.volumes)
      if (!vol.same_dims(subjects.front().volumes.front()))
        fail(Errc::validation, "subject " + s.subject_id + ": dims differ across dataset");
  }
}

Volume read_volume(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, path + ": cannot open");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) fail(Errc::parse, path + ": bad magic");
  uint32_t version = read_u32(in, path, "version");
  if (version != kVersion)
    fail(Errc::parse, path + ": unsupported version " + std::to_string(version));
  uint32_t nx = read_u32(in, path, "nx");
  uint32_t ny = read_u32(in, path, "ny");
  uint32_t nz = read_u32(in, path, "nz");
  if (nx == 0 || ny == 0 || nz == 0) fail(Errc::parse, path + ": zero dimension");
  uint64_t count = static_cast<uint64_t>(nx) * ny * nz;
  Volume vol(static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz));
  in.read(reinterpret_cast<char*>(vol.v.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<uint64_t>(in.gcount()) != count * sizeof(float))
    fail(Errc::parse, path + ": payload mismatch (header promises " + std::to_string(count) +
                          " voxels)");
  in.peek();
  if (!in.eof()) fail(Errc::parse, path + ": payload mismatch (trailing bytes)");
  for (float x : vol.v)
    if (!std::isfinite(x)) fail(Errc::parse, path + ": non-finite voxel value");
  return vol;
}

void write_volume(const std::string& path, const Volume& vol) {
  if (vol.size() != static_cast<int64_t>(vol.nx) * vol.ny * vol.nz)
    fail(Errc::validation, "volume payload length disagrees with dims");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io, path + ": cannot open for writing");
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, static_cast<uint32_t>(vol.nx));
  write_u32(out, static_cast<uint32_t>(vol.ny));
  write_u32(out, static_cast<uint32_t>(vol.nz));
  out.write(reinterpret_cast<const char*>(vol.v.data()),
            static_cast<std::streamsize>(vol.v.size() * sizeof(float)));
  if (!out) fail(Errc::io, path + ": write failed");
}

NormBounds population_bounds(const std::vector<const Volume*>& vols, double p_lo, double p_hi) {
  size_t total = 0;
  for (const Volume* v : vols) total += v->v.size();
  if (total == 0) fail(Errc::validation, "no voxels to normalize");
  std::vector<double> pooled;
  pooled.reserve(total);
  for (const Volume* v : vols) pooled.insert(pooled.end(), v->v.begin(), v->v.end());
  std::sort(pooled.begin(), pooled.end());
  NormBounds b;
  b.lo = percentile_sorted(pooled, p_lo);
  b.hi = percentile_sorted(pooled, p_hi);
  if (b.hi == b.lo) fail(Errc::numeric, "degenerate intensity range");
  return b;
}

void apply_minmax(Volume& vol, const NormBounds& b) {
  double scale = 1.0 / (b.hi - b.lo);
  for (float& x : vol.v) {
    double t = (static_cast<double>(x) - b.lo) * scale;
    x = static_cast<float>(std::clamp(t, 0.0, 1.0));
  }
}

std::vector<NormBounds> normalize_dataset(Dataset& ds, double p_lo, double p_hi) {
  ds.validate();
  std::vector<NormBounds> bounds;
  bounds.reserve(ds.modalities.size());
  for (size_t m = 0; m < ds.modalities.size(); ++m) {
    std::vector<const Volume*> vols;
    vols.reserve(ds.subjects.size());
    for (const auto& s : ds.subjects) vols.push_back(&s.volumes[m]);
    NormBounds b = population_bounds(vols, p_lo, p_hi);
    for (auto& s : ds.subjects) apply_minmax(s.volumes[m], b);
    bounds.push_back(b);
  }
  return bounds;
}

std::vector<double> minmax_normalize(const std::vector<double>& population_values, double p_lo,
                                     double p_hi) {
  if (population_values.size() < 2) fail(Errc::validation, "need at least two values");
  std::vector<double> sorted = population_values;
  std::sort(sorted.begin(), sorted.end());
  double lo = percentile_sorted(sorted, p_lo);
  double hi = percentile_sorted(sorted, p_hi);
  if (hi == lo) fail(Errc::numeric, "degenerate intensity range");
  std::vector<double> out(population_values.size());
  for (size_t i = 0; i < population_values.size(); ++i)
    out[i] = std::clamp((population_values[i] - lo) / (hi - lo), 0.0, 1.0);
  return out;
}

void save_dataset(const std::string& dir, const Dataset& ds) {
  ds.validate();
  fs::create_directories(fs::path(dir) / "volumes");
  std::ofstream manifest(fs::path(dir) / "dataset.csv", std::ios::trunc);
  if (!manifest) fail(Errc::io, dir + ": cannot write manifest");
  manifest << "subject_id,modality,path\n";
  for (const auto& s : ds.subjects) {
    for (size_t m = 0; m < ds.modalities.size(); ++m) {
      std::string rel = "volumes/" + s.subject_id + "_" + ds.modalities[m] + ".mmfv";
      write_volume((fs::path(dir) / rel).string(), s.volumes[m]);
      manifest << s.subject_id << ',' << ds.modalities[m] << ',' << rel << '\n';
    }
  }
  if (!manifest) fail(Errc::io, dir + ": manifest write failed");
}

Dataset load_dataset(const std::string& manifest_or_dir) {
  fs::path p(manifest_or_dir);
  if (fs::is_directory(p)) p /= "dataset.csv";
  std::ifstream in(p);
  if (!in) fail(Errc::io, p.string() + ": cannot open");
  fs::path base = p.parent_path();
  std::string line;
  if (!std::getline(in, line)) fail(Errc::parse, p.string() + ": empty manifest");
  Dataset ds;
  // subject order = first-appearance order in the manifest; same for modalities
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t c1 = line.find(',');
    size_t c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      fail(Errc::parse, p.string() + ": manifest row needs 3 columns: " + line);
    std::string sid = line.substr(0, c1);
    std::string modality = line.substr(c1 + 1, c2 - c1 - 1);
    std::string rel = line.substr(c2 + 1);
    auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.first == sid; });
    if (it == rows.end()) {
      rows.push_back({sid, {}});
      it = std::prev(rows.end());
    }
    it->second.push_back({modality, rel});
    if (std::find(ds.modalities.begin(), ds.modalities.end(), modality) == ds.modalities.end())
      ds.modalities.push_back(modality);
  }
  for (auto& [sid, files] : rows) {
    SubjectRecord rec;
    rec.subject_id = sid;
    rec.volumes.resize(ds.modalities.size());
    std::vector<bool> seen(ds.modalities.size(), false);
    for (auto& [modality, rel] : files) {
      auto idx = static_cast<size_t>(std::find(ds.modalities.begin(), ds.modalities.end(), modality) -
                                     ds.modalities.begin());
      if (seen[idx]) fail(Errc::parse, "duplicate volume for " + sid + "/" + modality);
      rec.volumes[idx] = read_volume((base / rel).string());
      seen[idx] = true;
    }
    for (size_t m = 0; m < seen.size(); ++m)
      if (!seen[m]) fail(Errc::validation, sid + ": missing modality " + ds.modalities[m]);
    ds.subjects.push_back(std::move(rec));
  }
  ds.validate();
  return ds;
}

}  // namespace fusestrata
