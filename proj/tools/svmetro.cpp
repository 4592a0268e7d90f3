// Command-line front end: calibrate, measure, simulate, serve.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "svmetro/error.hpp"
#include "svmetro/io.hpp"
#include "svmetro/metrology.hpp"
#include "svmetro/session.hpp"
#include "svmetro/svg.hpp"
#include "svmetro/synthetic.hpp"

#ifndef SVMETRO_REFERENCE_DIR
#define SVMETRO_REFERENCE_DIR "data/references"
#endif

namespace {

using namespace svmetro;

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kDegenerate = 4 };

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadRequest:
      return kUsage;
    case ErrorCode::DegenerateInput:
    case ErrorCode::ZeroVector:
    case ErrorCode::DegenerateLine:
    case ErrorCode::DegenerateConfiguration:
    case ErrorCode::MappedToInfinity:
    case ErrorCode::DegeneratePair:
    case ErrorCode::DegenerateGeometry:
    case ErrorCode::DegenerateDirection:
    case ErrorCode::ZeroLength:
      return kDegenerate;
    default:
      return kData;
  }
}

Eigen::Vector2d parse_xy(const std::string& s) {
  std::stringstream ss(s);
  double x = 0, y = 0;
  char comma = 0;
  if (!(ss >> x >> comma >> y) || comma != ',' || !ss.eof())
    fail(ErrorCode::BadRequest, "expected a point as x,y but got '" + s + "'");
  return {x, y};
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

struct CalibrateArgs {
  std::string reference;
  std::vector<std::string> corrs;
  std::string out;
  RansacConfig ransac;
  bool json = false;
};

int run_calibrate(const CalibrateArgs& a) {
  const ReferenceObject ref = load_reference(a.reference);
  CorrespondenceMap corrs;
  for (const auto& spec : a.corrs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
      fail(ErrorCode::BadRequest, "--corrs expects face=path, got '" + spec + "'");
    corrs[spec.substr(0, eq)] = load_correspondences_csv(spec.substr(eq + 1));
  }
  a.ransac.validate();
  const Calibration cal = calibrate(ref, corrs, a.ransac);
  const auto doc = to_json(cal);
  if (!a.out.empty()) write_file_atomic(a.out, dump(doc));

  if (a.json) {
    std::cout << dump(doc);
    return kOk;
  }
  std::printf("%-12s %9s %14s %10s\n", "face", "inliers", "mean err (px)", "iterations");
  for (const auto& f : cal.faces)
    std::printf("%-12s %4d/%-4d %14.3f %10d\n", f.face_id.c_str(), f.inliers, f.total,
                f.mean_inlier_error_px, f.iterations);
  const auto triple = [](const Homog3& x) {
    return "(" + fixed(x.a(), 6) + ", " + fixed(x.b(), 6) + ", " + fixed(x.c(), 6) + ")";
  };
  std::cout << "vanishing line l:  " << triple(cal.l) << "\n"
            << "vanishing point v: " << triple(cal.v) << "\n"
            << "alpha:             " << cal.alpha << " 1/mm\n";
  if (!a.out.empty()) std::cout << "wrote " << a.out << "\n";
  return kOk;
}

struct MeasureArgs {
  std::string calib;
  std::string base;
  std::string top;
  std::string overlay;
  bool json = false;
};

int run_measure(const MeasureArgs& a) {
  const Calibration cal = load_calibration(a.calib);
  const Measurement m =
      measure_height(cal, Homog3::point(parse_xy(a.base)), Homog3::point(parse_xy(a.top)));
  if (!a.overlay.empty()) write_file_atomic(a.overlay, measurement_svg(cal, m));
  if (a.json) {
    std::cout << dump(to_json(m));
    return kOk;
  }
  std::cout << "height: " << fixed(m.height_mm, 3) << " mm (" << fixed(m.height_mm / 10.0, 2)
            << " cm)\n"
            << "alignment shift: " << fixed(m.alignment_shift_px, 3) << " px\n";
  if (m.low_confidence)
    std::cout << "warning: base point is close to the vanishing line; low confidence\n";
  return kOk;
}

struct SimulateArgs {
  std::string reference = std::string(SVMETRO_REFERENCE_DIR) + "/box_10cm.json";
  std::string out;
  std::uint64_t seed = 0;
  std::vector<double> heights{50.0, 100.0, 170.0};
  double noise = 0.0;
  double outliers = 0.0;
  int grid = 5;
  bool svg = false;
};

int run_simulate(const SimulateArgs& a) {
  SceneConfig cfg;
  cfg.reference = load_reference(a.reference);
  cfg.object_heights_mm = a.heights;
  cfg.noise_sigma_px = a.noise;
  cfg.outlier_fraction = a.outliers;
  cfg.grid = a.grid;
  cfg.seed = a.seed;
  const SyntheticScene scene = generate(cfg);
  write_fixture(scene, a.out, a.svg);
  std::cout << "wrote fixture to " << a.out << "\n";
  for (const auto& o : scene.objects)
    std::cout << "object " << fixed(o.height_mm, 3) << " mm: base " << fixed(o.b_x.euclidean().x(), 3)
              << "," << fixed(o.b_x.euclidean().y(), 3) << " top " << fixed(o.t_x.euclidean().x(), 3)
              << "," << fixed(o.t_x.euclidean().y(), 3) << "\n";
  return kOk;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  std::string references = SVMETRO_REFERENCE_DIR;
  std::string ui;
};

int run_serve(ServeArgs a) {
  if (a.data_dir.empty()) {
    const char* env = std::getenv("SVMETRO_DATA_DIR");
    a.data_dir = env ? env : "sessions";
  }
  SessionStore store(a.data_dir, load_reference_dir(a.references));
  SessionServer server(store, a.ui);
  const int port = server.bind(a.host, a.port);
  if (port <= 0) fail(ErrorCode::BadRequest, "cannot bind " + a.host);
  std::cout << "listening on http://" << a.host << ":" << port << std::endl;
  server.listen();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-view metrology: lengths along a reference direction from one photo"};
  app.require_subcommand(1);

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "Estimate vanishing geometry and metric factor");
  c->add_option("--reference", cal.reference, "Reference object spec (JSON)")->required();
  c->add_option("--corrs", cal.corrs, "Correspondences as face=file.csv")->required();
  c->add_option("--out", cal.out, "Write calibration JSON here");
  c->add_option("--threshold", cal.ransac.inlier_threshold, "RANSAC inlier threshold (px)");
  c->add_option("--confidence", cal.ransac.confidence, "RANSAC confidence");
  c->add_option("--max-iterations", cal.ransac.max_iterations, "RANSAC iteration cap");
  c->add_option("--min-inliers", cal.ransac.min_inliers, "Minimum consensus size");
  c->add_option("--seed", cal.ransac.seed, "RANSAC seed");
  c->add_flag("--json", cal.json, "Print calibration JSON");

  MeasureArgs meas;
  auto* m = app.add_subcommand("measure", "Measure a length along the reference direction");
  m->add_option("--calib", meas.calib, "Calibration JSON")->required();
  m->add_option("--base", meas.base, "Base pick x,y (px)")->required();
  m->add_option("--top", meas.top, "Top pick x,y (px)")->required();
  m->add_option("--overlay", meas.overlay, "Write SVG overlay here");
  m->add_flag("--json", meas.json, "Print measurement JSON");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Write a synthetic fixture directory");
  s->add_option("--reference", sim.reference, "Reference object spec (JSON)");
  s->add_option("--out", sim.out, "Output directory")->required();
  s->add_option("--seed", sim.seed, "Scene seed");
  s->add_option("--heights", sim.heights, "Object heights (mm)")->delimiter(',');
  s->add_option("--noise", sim.noise, "Gaussian pixel noise sigma");
  s->add_option("--outliers", sim.outliers, "Outlier fraction in [0,1)");
  s->add_option("--grid", sim.grid, "Grid points per face side");
  s->add_flag("--svg", sim.svg, "Also write scene.svg");

  ServeArgs srv;
  auto* v = app.add_subcommand("serve", "Run the HTTP session service");
  v->add_option("--host", srv.host, "Bind address");
  v->add_option("--port", srv.port, "Port (0 picks a free one)");
  v->add_option("--data-dir", srv.data_dir, "Session directory (default $SVMETRO_DATA_DIR)");
  v->add_option("--references", srv.references, "Directory of reference specs");
  v->add_option("--ui", srv.ui, "Static UI bundle served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*c) return run_calibrate(cal);
    if (*m) return run_measure(meas);
    if (*s) return run_simulate(sim);
    if (*v) return run_serve(srv);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
