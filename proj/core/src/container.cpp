#include "otdiff/container.hpp"

#include <fstream>
#include <sstream>

#include "otdiff/binary_io.hpp"
#include "otdiff/common.hpp"
#include "otdiff/digest.hpp"

namespace otdiff {

void save_potential(const std::filesystem::path& path, const BrenierPotential& p) {
  BinaryWriter w(path);
  w.write_magic("SDOT");
  w.write_u32(1);
  w.write_u32(static_cast<std::uint32_t>(p.dim()));
  w.write_u64(p.size());
  w.write_f64s(p.targets().points());
  w.write_f64s(p.targets().measure());
  w.write_f64s(p.heights());
  w.write_u32(p.provenance().m_steps);
  w.write_u64(p.provenance().schedule_digest);
  w.write_u64(p.provenance().config_digest);
  w.close();
}

BrenierPotential load_potential(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.expect_magic("SDOT");
  const std::uint32_t version = r.read_u32();
  if (version != 1) throw ConfigError("potential container: unsupported version");
  const std::uint32_t d = r.read_u32();
  const std::uint64_t count = r.read_u64();
  std::vector<double> points = r.read_f64s(count * d);
  std::vector<double> measure = r.read_f64s(count);
  std::vector<double> heights = r.read_f64s(count);

  BrenierPotential::Provenance prov;
  if (!r.at_eof()) {
    prov.m_steps = r.read_u32();
    prov.schedule_digest = r.read_u64();
    prov.config_digest = r.read_u64();
  }
  return BrenierPotential(TargetSet(d, std::move(points), std::move(measure)),
                          std::move(heights), prov);
}

nlohmann::json potential_to_json(const BrenierPotential& p) {
  nlohmann::json j;
  j["format"] = "sdot";
  j["version"] = 1;
  j["dim"] = p.dim();
  j["count"] = p.size();
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto row = p.targets().point(i);
    points.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["points"] = std::move(points);
  j["measure"] = p.targets().measure();
  j["heights"] = p.heights();
  j["m_steps"] = p.provenance().m_steps;
  j["schedule_digest"] = to_hex(p.provenance().schedule_digest);
  j["config_digest"] = to_hex(p.provenance().config_digest);
  return j;
}

BrenierPotential potential_from_json(const nlohmann::json& j) {
  if (j.at("format").get<std::string>() != "sdot") {
    throw ConfigError("potential json: wrong format tag");
  }
  const std::size_t d = j.at("dim").get<std::size_t>();
  std::vector<double> points;
  for (const auto& row : j.at("points")) {
    for (const auto& v : row) points.push_back(v.get<double>());
  }
  BrenierPotential::Provenance prov;
  prov.m_steps = j.value("m_steps", 0u);
  prov.schedule_digest = parse_hex_u64(j.value("schedule_digest", "0"));
  prov.config_digest = parse_hex_u64(j.value("config_digest", "0"));
  return BrenierPotential(
      TargetSet(d, std::move(points), j.at("measure").get<std::vector<double>>()),
      j.at("heights").get<std::vector<double>>(), prov);
}

void save_potential_json(const std::filesystem::path& path, const BrenierPotential& p) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  out << potential_to_json(p).dump(2) << "\n";
}

BrenierPotential load_potential_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open for reading: " + path.string());
  nlohmann::json j;
  in >> j;
  return potential_from_json(j);
}

void save_latents(const std::filesystem::path& path, const LatentStore& store) {
  BinaryWriter w(path);
  w.write_magic("LTNT");
  w.write_u32(1);
  w.write_u32(static_cast<std::uint32_t>(store.dim));
  w.write_u64(store.count());
  w.write_f64s(store.latents);
  w.write_u32(store.m_steps);
  w.write_u64(store.schedule_digest);
  w.write_u64(store.data_digest);
  w.write_u64(store.config_digest);
  w.close();
}

LatentStore load_latents(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.expect_magic("LTNT");
  const std::uint32_t version = r.read_u32();
  if (version != 1) throw ConfigError("latent container: unsupported version");
  LatentStore store;
  store.dim = r.read_u32();
  const std::uint64_t count = r.read_u64();
  store.latents = r.read_f64s(count * store.dim);
  store.m_steps = r.read_u32();
  store.schedule_digest = r.read_u64();
  store.data_digest = r.read_u64();
  store.config_digest = r.read_u64();
  return store;
}

void save_batch(const std::filesystem::path& path, const SampleBatch& batch) {
  BinaryWriter w(path);
  w.write_magic("SMPB");
  w.write_u32(1);
  w.write_u32(static_cast<std::uint32_t>(batch.dim));
  w.write_u64(batch.size());
  w.write_f64s(batch.data);
  w.write_u64(batch.seed);
  w.write_u64(batch.config_digest);
  w.write_u64(batch.score_evals_per_sample);
  w.close();
}

SampleBatch load_batch(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.expect_magic("SMPB");
  const std::uint32_t version = r.read_u32();
  if (version != 1) throw ConfigError("batch container: unsupported version");
  SampleBatch batch;
  batch.dim = r.read_u32();
  const std::uint64_t n = r.read_u64();
  batch.data = r.read_f64s(n * batch.dim);
  batch.seed = r.read_u64();
  batch.config_digest = r.read_u64();
  batch.score_evals_per_sample = r.read_u64();
  return batch;
}

void save_batch_csv(const std::filesystem::path& path, const SampleBatch& batch) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  out << "# seed=" << batch.seed << "\n";
  out << "# config_digest=" << to_hex(batch.config_digest) << "\n";
  out << "# score_evals_per_sample=" << batch.score_evals_per_sample << "\n";
  for (std::size_t k = 0; k < batch.dim; ++k) out << (k ? "," : "") << "x" << k;
  out << "\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto row = batch.row(i);
    for (std::size_t k = 0; k < batch.dim; ++k) {
      out << (k ? "," : "") << format_double(row[k]);
    }
    out << "\n";
  }
}

std::vector<double> load_points(const std::filesystem::path& path, std::size_t& dim_out) {
  if (path.extension() == ".csv") {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open for reading: " + path.string());
    std::vector<double> points;
    dim_out = 0;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || (line[0] == 'x' && dim_out == 0)) continue;
      std::stringstream ss(line);
      std::string cell;
      std::size_t cols = 0;
      while (std::getline(ss, cell, ',')) {
        points.push_back(std::stod(cell));
        ++cols;
      }
      if (dim_out == 0) {
        dim_out = cols;
      } else if (cols != dim_out) {
        throw InputError("point csv: inconsistent column count");
      }
    }
    if (points.empty()) throw InputError("point csv: no points");
    return points;
  }
  const SampleBatch batch = load_batch(path);
  if (batch.size() == 0) throw InputError("point container: no points");
  dim_out = batch.dim;
  return batch.data;
}

std::uint64_t digest_doubles(const std::vector<double>& values) {
  return Fnv1a64().update_doubles(values).value();
}

}  // namespace otdiff
