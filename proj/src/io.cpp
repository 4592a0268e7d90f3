#include "svmetro/io.hpp"

#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "svmetro/error.hpp"
#include "svmetro/svg.hpp"

namespace svmetro {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& field, int line) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value))
    fail(ErrorCode::ParseError,
         "line " + std::to_string(line) + ": '" + field + "' is not a finite number");
  return value;
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json matrix_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

Eigen::Matrix3d matrix_from_json(const json& j) {
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}

json point2(const Eigen::Vector2d& p) { return {p.x(), p.y()}; }

}  // namespace

std::vector<Correspondence> parse_correspondences_csv(const std::string& text) {
  std::vector<Correspondence> out;
  std::istringstream in(text);
  std::string raw;
  bool header = false;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (line == 1 && raw.rfind("\xEF\xBB\xBF", 0) == 0) raw.erase(0, 3);
    const auto hash = raw.find('#');
    const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;

    std::vector<std::string> fields;
    std::stringstream ss(content);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(trim(f));
    if (!content.empty() && content.back() == ',') fields.emplace_back();

    if (!header) {
      if (fields != std::vector<std::string>{"tx", "ty", "ix", "iy"})
        fail(ErrorCode::ParseError, "line " + std::to_string(line) +
                                        ": expected header 'tx,ty,ix,iy'");
      header = true;
      continue;
    }
    if (fields.size() != 4)
      fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": expected 4 fields, got " +
                                      std::to_string(fields.size()));
    out.push_back({{parse_number(fields[0], line), parse_number(fields[1], line)},
                   {parse_number(fields[2], line), parse_number(fields[3], line)}});
  }
  if (!header) fail(ErrorCode::ParseError, "missing header 'tx,ty,ix,iy'");
  return out;
}

std::vector<Correspondence> load_correspondences_csv(const std::filesystem::path& path) {
  try {
    return parse_correspondences_csv(read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string format_correspondences_csv(const std::vector<Correspondence>& corrs) {
  std::string out = "tx,ty,ix,iy\n";
  for (const auto& c : corrs)
    out += number(c.templ.x()) + "," + number(c.templ.y()) + "," + number(c.image.x()) + "," +
           number(c.image.y()) + "\n";
  return out;
}

json to_json(const Homog3& x) { return {x.a(), x.b(), x.c()}; }

Homog3 homog_from_json(const json& j) {
  if (!j.is_array() || (j.size() != 3 && j.size() != 2))
    fail(ErrorCode::ParseError, "expected a homogeneous triple or an [x, y] point");
  if (j.size() == 2) return Homog3::point(j.at(0).get<double>(), j.at(1).get<double>());
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json to_json(const Calibration& cal) {
  json faces = json::object();
  for (const auto& f : cal.faces)
    faces[f.face_id] = {{"inliers", f.inliers},
                        {"total", f.total},
                        {"mean_inlier_error_px", f.mean_inlier_error_px},
                        {"iterations", f.iterations},
                        {"homography", matrix_json(f.homography.matrix())}};
  return {{"l", to_json(cal.l)},
          {"v", to_json(cal.v)},
          {"b_r", to_json(cal.b_r)},
          {"t_r", to_json(cal.t_r)},
          {"alpha", cal.alpha},
          {"reference_height_mm", cal.reference_height_mm},
          {"faces", faces},
          {"diagnostics",
           {{"v_consistency", cal.v_consistency},
            {"t_r_alignment_shift_px", cal.t_r_alignment_shift_px}}}};
}

Calibration calibration_from_json(const json& j) {
  Calibration cal;
  try {
    cal.l = homog_from_json(j.at("l"));
    cal.v = homog_from_json(j.at("v"));
    cal.b_r = homog_from_json(j.at("b_r"));
    cal.t_r = homog_from_json(j.at("t_r"));
    cal.alpha = j.at("alpha").get<double>();
    cal.reference_height_mm = j.at("reference_height_mm").get<double>();
    if (j.contains("faces"))
      for (const auto& [id, f] : j.at("faces").items())
        cal.faces.push_back({id, f.at("inliers").get<int>(), f.at("total").get<int>(),
                             f.at("mean_inlier_error_px").get<double>(),
                             f.at("iterations").get<int>(),
                             Homography(matrix_from_json(f.at("homography")))});
    if (j.contains("diagnostics")) {
      const auto& d = j.at("diagnostics");
      cal.v_consistency = d.value("v_consistency", 0.0);
      cal.t_r_alignment_shift_px = d.value("t_r_alignment_shift_px", 0.0);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("calibration: ") + e.what());
  }
  if (!(cal.alpha > 0.0)) fail(ErrorCode::ParseError, "calibration: alpha must be positive");
  return cal;
}

Calibration load_calibration(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return calibration_from_json(j);
}

json to_json(const Measurement& m) {
  return {{"b", point2(m.b_x.euclidean())},
          {"t_raw", point2(m.t_x_raw.euclidean())},
          {"t_aligned", point2(m.t_x_aligned.euclidean())},
          {"height_mm", m.height_mm},
          {"alignment_shift_px", m.alignment_shift_px},
          {"horizon_proximity", m.horizon_proximity},
          {"low_confidence", m.low_confidence}};
}

json to_json(const RansacConfig& cfg) {
  return {{"inlier_threshold", cfg.inlier_threshold},
          {"confidence", cfg.confidence},
          {"max_iterations", cfg.max_iterations},
          {"min_inliers", cfg.min_inliers},
          {"seed", cfg.seed}};
}

RansacConfig ransac_config_from_json(const json& j) {
  RansacConfig cfg;
  if (j.is_null()) return cfg;
  try {
    cfg.inlier_threshold = j.value("inlier_threshold", cfg.inlier_threshold);
    cfg.confidence = j.value("confidence", cfg.confidence);
    cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
    cfg.min_inliers = j.value("min_inliers", cfg.min_inliers);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("ransac config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json to_json(const Camera& cam) {
  return {{"fx", cam.fx},
          {"fy", cam.fy},
          {"cx", cam.cx},
          {"cy", cam.cy},
          {"rotation", matrix_json(cam.rotation)},
          {"translation_mm", {cam.translation.x(), cam.translation.y(), cam.translation.z()}}};
}

json scene_truth_json(const SyntheticScene& scene) {
  json faces = json::object();
  for (const auto& f : scene.faces) {
    json outliers = json::array();
    for (std::size_t i = 0; i < f.is_outlier.size(); ++i)
      if (f.is_outlier[i]) outliers.push_back(i);
    faces[f.face_id] = {{"homography", matrix_json(f.true_homography.matrix())},
                        {"outlier_rows", outliers}};
  }
  json objects = json::array();
  for (const auto& o : scene.objects)
    objects.push_back({{"height_mm", o.height_mm},
                       {"base", point2(o.b_x.euclidean())},
                       {"top", point2(o.t_x.euclidean())}});
  return {{"seed", scene.seed},
          {"noise_sigma_px", scene.noise_sigma_px},
          {"image_size", {scene.image_width, scene.image_height}},
          {"camera", to_json(scene.camera)},
          {"faces", faces},
          {"l", to_json(scene.true_l)},
          {"v", to_json(scene.true_v)},
          {"b_r", to_json(scene.true_b_r)},
          {"t_r", to_json(scene.true_t_r)},
          {"objects", objects}};
}

void write_fixture(const SyntheticScene& scene, const std::filesystem::path& dir,
                   bool with_svg) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "reference.json", dump(to_json(scene.reference)));
  for (const auto& f : scene.faces)
    write_file_atomic(dir / (f.face_id + ".csv"), format_correspondences_csv(f.correspondences));
  write_file_atomic(dir / "truth.json", dump(scene_truth_json(scene)));
  if (with_svg) write_file_atomic(dir / "scene.svg", scene_svg(scene));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  static std::atomic<unsigned long> counter{0};
  const auto tmp = path.string() + ".tmp." + std::to_string(::getpid()) + "." +
                   std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::ParseError, "cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::ParseError, "write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace svmetro
