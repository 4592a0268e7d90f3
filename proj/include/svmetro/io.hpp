#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "svmetro/metrology.hpp"
#include "svmetro/ransac.hpp"
#include "svmetro/synthetic.hpp"

namespace svmetro {

// Correspondence CSV: header `tx,ty,ix,iy`, millimeters then pixels, one row
// per correspondence, `#` starts a comment.
std::vector<Correspondence> parse_correspondences_csv(const std::string& text);
std::vector<Correspondence> load_correspondences_csv(const std::filesystem::path& path);
std::string format_correspondences_csv(const std::vector<Correspondence>& corrs);

nlohmann::json to_json(const Homog3& x);
Homog3 homog_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Calibration& cal);
Calibration calibration_from_json(const nlohmann::json& j);
Calibration load_calibration(const std::filesystem::path& path);

nlohmann::json to_json(const Measurement& m);
nlohmann::json to_json(const RansacConfig& cfg);
//! Missing keys keep their defaults.
RansacConfig ransac_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Camera& cam);
nlohmann::json scene_truth_json(const SyntheticScene& scene);

//! Writes reference.json, <face>.csv, truth.json and optionally scene.svg.
void write_fixture(const SyntheticScene& scene, const std::filesystem::path& dir,
                   bool with_svg);

//! Write-temp-then-rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

//! Canonical text form for every JSON document this project writes.
std::string dump(const nlohmann::json& j);

}  // namespace svmetro
