#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "otdiff/brenier.hpp"
#include "otdiff/sampler.hpp"

namespace otdiff {

// Binary artifact containers, all little-endian.
//
// Potential ("SDOT"): magic, version u32, d u32, |I| u64, f64 points
// (row-major |I| x d), f64 measure (|I|), f64 heights (|I|), then a
// provenance trailer: M u32, schedule digest u64, config digest u64.
// Readers accept files that end after the heights.
//
// Latents ("LTNT"): magic, version u32, d u32, count u64, f64 latents,
// M u32, schedule digest u64, data digest u64, config digest u64.
//
// Batch ("SMPB"): magic, version u32, d u32, n u64, f64 data, seed u64,
// config digest u64, score evals per sample u64.

void save_potential(const std::filesystem::path& path, const BrenierPotential& p);
BrenierPotential load_potential(const std::filesystem::path& path);

/// JSON mirror of the potential container for small instances and debugging.
nlohmann::json potential_to_json(const BrenierPotential& p);
BrenierPotential potential_from_json(const nlohmann::json& j);
void save_potential_json(const std::filesystem::path& path, const BrenierPotential& p);
BrenierPotential load_potential_json(const std::filesystem::path& path);

struct LatentStore {
  std::size_t dim = 0;
  std::vector<double> latents;  // count x dim
  std::uint32_t m_steps = 0;
  std::uint64_t schedule_digest = 0;
  std::uint64_t data_digest = 0;
  std::uint64_t config_digest = 0;

  std::size_t count() const { return dim == 0 ? 0 : latents.size() / dim; }
};

void save_latents(const std::filesystem::path& path, const LatentStore& store);
LatentStore load_latents(const std::filesystem::path& path);

void save_batch(const std::filesystem::path& path, const SampleBatch& batch);
SampleBatch load_batch(const std::filesystem::path& path);

/// One row per sample; header comments carry seed and config digest.
void save_batch_csv(const std::filesystem::path& path, const SampleBatch& batch);

/// Point-cloud ingestion: ".csv" (one row per point, optional comments) or a
/// batch container.
std::vector<double> load_points(const std::filesystem::path& path, std::size_t& dim_out);

std::uint64_t digest_doubles(const std::vector<double>& values);

}  // namespace otdiff
