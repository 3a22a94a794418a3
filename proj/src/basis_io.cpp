#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "iontrap/bem.hpp"

namespace iontrap {

static_assert(std::endian::native == std::endian::little,
              "basis cache assumes a little-endian host");

namespace {
constexpr char kMagic[8] = {'I', 'O', 'N', 'B', 'A', 'S', 'I', 'S'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("basis cache: truncated file");
  return v;
}
}  // namespace

void save_basis(const std::string& path, const BasisSet& basis) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write basis cache: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, basis.mesh_hash);
  write_pod(out, static_cast<uint64_t>(basis.panel_count()));
  write_pod(out, static_cast<uint32_t>(kElectrodeCount));
  write_pod(out, basis.options.tolerance);
  write_pod(out, basis.diagnostics.max_residual);
  write_pod(out, basis.diagnostics.rcond);
  for (int e = 0; e < kElectrodeCount; ++e) {
    write_pod(out, static_cast<uint8_t>(basis.electrode_present[e] ? 1 : 0));
    out.write(reinterpret_cast<const char*>(basis.sigma.col(e).data()),
              static_cast<std::streamsize>(sizeof(double)) *
                  basis.panel_count());
  }
  if (!out) throw std::runtime_error("basis cache write failed: " + path);
}

BasisSet load_basis(const std::string& path,
                    std::shared_ptr<const ElectrodeMesh> mesh) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open basis cache: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("basis cache: bad magic in " + path);
  if (read_pod<uint32_t>(in) != kVersion)
    throw std::runtime_error("basis cache: unsupported version in " + path);

  BasisSet basis;
  basis.mesh = mesh;
  basis.mesh_hash = read_pod<uint64_t>(in);
  if (mesh && basis.mesh_hash != mesh->content_hash())
    throw std::runtime_error("basis cache: mesh hash mismatch for " + path);
  auto n = read_pod<uint64_t>(in);
  if (mesh && n != mesh->panels.size())
    throw std::runtime_error("basis cache: panel count mismatch for " + path);
  if (read_pod<uint32_t>(in) != kElectrodeCount)
    throw std::runtime_error("basis cache: electrode count mismatch");
  basis.options.tolerance = read_pod<double>(in);
  basis.diagnostics.max_residual = read_pod<double>(in);
  basis.diagnostics.rcond = read_pod<double>(in);
  basis.sigma.resize(static_cast<Eigen::Index>(n), kElectrodeCount);
  for (int e = 0; e < kElectrodeCount; ++e) {
    basis.electrode_present[e] = read_pod<uint8_t>(in) != 0;
    in.read(reinterpret_cast<char*>(basis.sigma.col(e).data()),
            static_cast<std::streamsize>(sizeof(double) * n));
    if (!in) throw std::runtime_error("basis cache: truncated charge data");
  }
  if (mesh) {
    basis.geom.resize(mesh->panels.size());
    for (std::size_t i = 0; i < mesh->panels.size(); ++i)
      basis.geom[i] = make_panel_geom(mesh->panels[i]);
    for (const auto& p : mesh->panels)
      basis.electrode_present[electrode_index(p.electrode)] = true;
  }
  return basis;
}

bool basis_cache_matches(const std::string& path, uint64_t mesh_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) return false;
  try {
    if (read_pod<uint32_t>(in) != kVersion) return false;
    return read_pod<uint64_t>(in) == mesh_hash;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace iontrap
