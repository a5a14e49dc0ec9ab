#include "oce/ocb_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "oce/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "OCB I/O assumes a little-endian host");

namespace oce {
namespace {

constexpr char kScanMagic[4] = {'O', 'C', 'B', '1'};
constexpr char kFieldMagic[4] = {'O', 'C', 'D', '1'};

template <typename T>
void put(std::string& buf, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.append(raw, sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const char* what) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw IoError(std::string("OCB: truncated ") + what);
  return v;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void check_header_dims(std::uint32_t m, std::uint32_t n, const char* kind) {
  if (m == 0 || n == 0 || std::uint64_t(m) * n > (1ull << 31))
    throw IoError(std::string(kind) + ": malformed header (bad dimensions)");
}

} // namespace

void write_bscan(const std::filesystem::path& path, const ComplexBScan& scan) {
  scan.validate();
  std::string buf;
  buf.reserve(44 + scan.samples.size() * 8);
  buf.append(kScanMagic, 4);
  put<std::uint32_t>(buf, std::uint32_t(scan.m));
  put<std::uint32_t>(buf, std::uint32_t(scan.n));
  put<double>(buf, scan.axial_pitch_um);
  put<double>(buf, scan.lateral_pitch_um);
  put<double>(buf, scan.lambda0_um);
  put<double>(buf, scan.refractive_index);
  for (const auto& s : scan.samples) {
    put<float>(buf, float(s.real()));
    put<float>(buf, float(s.imag()));
  }
  write_file(path, buf);
}

ComplexBScan read_bscan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kScanMagic, 4) != 0)
    throw IoError("OCB: malformed header (bad magic)");
  const auto m = get<std::uint32_t>(in, "header");
  const auto n = get<std::uint32_t>(in, "header");
  check_header_dims(m, n, "OCB");
  ComplexBScan scan{int(m), int(n)};
  scan.axial_pitch_um = get<double>(in, "header");
  scan.lateral_pitch_um = get<double>(in, "header");
  scan.lambda0_um = get<double>(in, "header");
  scan.refractive_index = get<double>(in, "header");
  if (!(scan.axial_pitch_um > 0.0) || !(scan.lateral_pitch_um > 0.0) ||
      !(scan.lambda0_um > 0.0) || !(scan.refractive_index > 0.0))
    throw IoError("OCB: malformed header (bad metadata)");
  std::vector<float> payload(std::size_t(m) * n * 2);
  if (!in.read(reinterpret_cast<char*>(payload.data()),
               std::streamsize(payload.size() * sizeof(float))))
    throw IoError("OCB: truncated payload");
  for (std::size_t k = 0; k < scan.samples.size(); ++k) {
    const float re = payload[2 * k], im = payload[2 * k + 1];
    if (!std::isfinite(re) || !std::isfinite(im))
      throw IoError("OCB: non-finite samples");
    scan.samples[k] = {double(re), double(im)};
  }
  return scan;
}

void write_displacement_bin(const std::filesystem::path& path, const DisplacementField& field,
                            const FieldMeta& meta) {
  field.validate();
  std::string buf;
  buf.append(kFieldMagic, 4);
  put<std::uint32_t>(buf, std::uint32_t(field.m));
  put<std::uint32_t>(buf, std::uint32_t(field.n));
  put<double>(buf, meta.axial_pitch_um);
  put<double>(buf, meta.lateral_pitch_um);
  put<double>(buf, meta.lambda0_um);
  put<double>(buf, meta.refractive_index);
  const std::size_t sz = std::size_t(field.m) * field.n;
  for (std::size_t k = 0; k < sz; ++k) {
    put<float>(buf, float(field.axial_um[k]));
    put<float>(buf, float(field.lateral_um[k]));
  }
  buf.append(reinterpret_cast<const char*>(field.valid.data()), sz);
  write_file(path, buf);
}

DisplacementField read_displacement_bin(const std::filesystem::path& path, FieldMeta* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kFieldMagic, 4) != 0)
    throw IoError("OCD: malformed header (bad magic)");
  const auto m = get<std::uint32_t>(in, "header");
  const auto n = get<std::uint32_t>(in, "header");
  check_header_dims(m, n, "OCD");
  FieldMeta local;
  local.axial_pitch_um = get<double>(in, "header");
  local.lateral_pitch_um = get<double>(in, "header");
  local.lambda0_um = get<double>(in, "header");
  local.refractive_index = get<double>(in, "header");
  if (meta) *meta = local;
  DisplacementField field{int(m), int(n)};
  const std::size_t sz = std::size_t(m) * n;
  std::vector<float> payload(sz * 2);
  if (!in.read(reinterpret_cast<char*>(payload.data()),
               std::streamsize(payload.size() * sizeof(float))))
    throw IoError("OCD: truncated payload");
  for (std::size_t k = 0; k < sz; ++k) {
    field.axial_um[k] = double(payload[2 * k]);
    field.lateral_um[k] = double(payload[2 * k + 1]);
  }
  if (!in.read(reinterpret_cast<char*>(field.valid.data()), std::streamsize(sz)))
    throw IoError("OCD: truncated validity block");
  field.has_lateral = true;
  return field;
}

void write_displacement_csv(const std::filesystem::path& path, const DisplacementField& field) {
  field.validate();
  std::string buf = "i,j,axial_um,lateral_um,valid\n";
  char line[128];
  for (int i = 0; i < field.m; ++i)
    for (int j = 0; j < field.n; ++j) {
      const std::size_t k = field.idx(i, j);
      std::snprintf(line, sizeof(line), "%d,%d,%.9g,%.9g,%d\n", i, j, field.axial_um[k],
                    field.lateral_um[k], int(field.valid[k]));
      buf += line;
    }
  write_file(path, buf);
}

DisplacementField read_displacement_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string header;
  if (!std::getline(in, header) || header != "i,j,axial_um,lateral_um,valid")
    throw IoError("displacement CSV: unexpected header in " + path.string());
  // The CSV carries the same 32-bit precision as the binary container, so
  // values are parsed as floats and widened.
  struct Row { int i, j, valid; float a, l; };
  std::vector<Row> rows;
  int max_i = -1, max_j = -1;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Row r{};
    if (std::sscanf(line.c_str(), "%d,%d,%f,%f,%d", &r.i, &r.j, &r.a, &r.l, &r.valid) != 5)
      throw IoError("displacement CSV: malformed row in " + path.string());
    max_i = std::max(max_i, r.i);
    max_j = std::max(max_j, r.j);
    rows.push_back(r);
  }
  if (rows.empty()) throw IoError("displacement CSV: no data rows in " + path.string());
  DisplacementField field(max_i + 1, max_j + 1);
  for (const auto& r : rows) {
    const std::size_t k = field.idx(r.i, r.j);
    field.axial_um[k] = r.a;
    field.lateral_um[k] = r.l;
    field.valid[k] = std::uint8_t(r.valid != 0);
  }
  field.has_lateral = true;
  return field;
}

void write_strain_csv(const std::filesystem::path& path, const StrainField& field) {
  field.validate();
  std::string buf = "i,j,strain,valid\n";
  char line[96];
  for (int i = 0; i < field.m; ++i)
    for (int j = 0; j < field.n; ++j) {
      const std::size_t k = field.idx(i, j);
      std::snprintf(line, sizeof(line), "%d,%d,%.9g,%d\n", i, j, field.strain[k],
                    int(field.valid[k]));
      buf += line;
    }
  write_file(path, buf);
}

} // namespace oce
