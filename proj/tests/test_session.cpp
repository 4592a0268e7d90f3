#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <future>

#include "support.hpp"
#include "svmetro/error.hpp"
#include "svmetro/io.hpp"
#include "svmetro/session.hpp"
#include "svmetro/synthetic.hpp"

// After Eigen: <resolv.h> defines a _res macro that collides with Eigen internals.
#include <httplib.h>

using namespace svmetro;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  const fs::path dir = fs::temp_directory_path() /
                       ("svmetro_session_" + name + "_" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::map<std::string, ReferenceObject> refs() { return load_reference_dir(SVMETRO_REFERENCE_DIR); }

SyntheticScene scene(std::uint64_t seed, double sigma = 0.0) {
  SceneConfig cfg;
  cfg.reference = test::box_10cm();
  cfg.seed = seed;
  cfg.noise_sigma_px = sigma;
  cfg.object_heights_mm = {50, 100, 170};
  return generate(cfg);
}

json rows(const std::vector<Correspondence>& corrs) {
  json out = json::array();
  for (const auto& c : corrs) out.push_back({c.templ.x(), c.templ.y(), c.image.x(), c.image.y()});
  return {{"correspondences", out}};
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::BadRequest;
}

struct Running {
  SessionStore store;
  SessionServer server;
  int port;
  httplib::Client client;
  explicit Running(const fs::path& dir)
      : store(dir, refs()), server(store), port(server.bind("127.0.0.1", 0)),
        client("127.0.0.1", port) {
    server.start();
  }
  ~Running() { server.stop(); }

  std::string upload(const std::string& image, const std::string& reference) {
    httplib::MultipartFormDataItems items = {{"image", image, "photo.png", "image/png"},
                                             {"reference", reference, "", ""}};
    auto res = client.Post("/sessions", items);
    REQUIRE(res);
    REQUIRE(res->status == 200);
    return json::parse(res->body).at("id").get<std::string>();
  }
};

}  // namespace

TEST_CASE("image sniffing") {
  CHECK(inspect_image(test::png_header(1920, 1080)).width == 1920);
  const std::string jpeg("\xFF\xD8\xFF\xE0\x00\x04\x00\x00\xFF\xC0\x00\x11\x08\x02\xD0\x05\x00", 17);
  const ImageInfo info = inspect_image(jpeg);
  CHECK(info.format == "jpeg");
  CHECK(info.width == 1280);
  CHECK(info.height == 720);
  CHECK(code_of([] { inspect_image("GIF89a....................."); }) == ErrorCode::UndecodableImage);
  CHECK(code_of([] { inspect_image(test::png_header(0, 5)); }) == ErrorCode::UndecodableImage);
  CHECK(code_of([] { inspect_image(std::string("\xFF\xD8\xFF\xD9", 4)); }) ==
        ErrorCode::UndecodableImage);
}

TEST_CASE("status mapping") {
  CHECK(http_status(ErrorCode::UnknownSession) == 404);
  CHECK(http_status(ErrorCode::UnknownReference) == 404);
  CHECK(http_status(ErrorCode::NotCalibrated) == 409);
  CHECK(http_status(ErrorCode::ParseError) == 400);
  CHECK(http_status(ErrorCode::UndecodableImage) == 400);
  CHECK(http_status(ErrorCode::NoConsensus) == 422);
  CHECK(http_status(ErrorCode::ZeroLength) == 422);
}

TEST_CASE("store: lifecycle and errors") {
  const fs::path dir = fresh_dir("store");
  SessionStore store(dir, refs());
  const std::string png = test::png_header(1920, 1080);

  CHECK(code_of([&] { store.create_session(png, "no_such_box"); }) == ErrorCode::UnknownReference);
  CHECK(code_of([&] { store.create_session("not an image", "box_10cm"); }) ==
        ErrorCode::UndecodableImage);
  CHECK(code_of([&] { store.get_session("0123456789abcdef0123456789abcdef"); }) ==
        ErrorCode::UnknownSession);
  CHECK(code_of([&] { store.get_session("../etc/passwd"); }) == ErrorCode::UnknownSession);

  const std::string a = store.create_session(png, "box_10cm");
  const std::string b = store.create_session(png, "box_10cm");
  CHECK(a != b);
  CHECK(a.size() == 32);

  CHECK(code_of([&] { store.measure(a, {0, 0}, {0, 10}); }) == ErrorCode::NotCalibrated);
  CHECK(code_of([&] { store.put_correspondences(a, "side", {}); }) == ErrorCode::ValidationError);

  const SyntheticScene s = scene(5);
  for (const auto& f : s.faces) store.put_correspondences(a, f.face_id, f.correspondences);
  const Calibration cal = store.calibrate(a, {});
  for (const auto& o : s.objects) {
    const Measurement m = store.measure(a, o.b_x.euclidean(), o.t_x.euclidean());
    CHECK(test::relative_error(m.height_mm, o.height_mm) < 1e-6);
  }
  json doc = store.get_session(a);
  CHECK(doc.at("measurements").size() == 3);
  CHECK(doc.at("calibration").at("alpha").get<double>() == cal.alpha);

  // New correspondences invalidate the calibration.
  store.put_correspondences(a, "top", s.faces.front().correspondences);
  doc = store.get_session(a);
  CHECK(doc.at("calibration").is_null());
  CHECK(doc.at("measurements").empty());
  CHECK(code_of([&] { store.measure(a, {0, 0}, {0, 10}); }) == ErrorCode::NotCalibrated);

  // Persistence: a fresh store over the same directory sees the session.
  SessionStore reopened(dir, refs());
  CHECK(reopened.get_session(a).at("correspondences").size() == 2);

  for (const auto& entry : fs::directory_iterator(dir))
    CHECK(entry.path().filename().string().find(".tmp") == std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("store: concurrent measurements on one session are all recorded") {
  const fs::path dir = fresh_dir("concurrent");
  SessionStore store(dir, refs());
  const std::string id = store.create_session(test::png_header(640, 480), "box_10cm");
  const SyntheticScene s = scene(9);
  for (const auto& f : s.faces) store.put_correspondences(id, f.face_id, f.correspondences);
  store.calibrate(id, {});
  std::vector<std::future<void>> jobs;
  for (int i = 0; i < 8; ++i)
    jobs.push_back(std::async(std::launch::async, [&] {
      for (int k = 0; k < 5; ++k)
        store.measure(id, s.objects[0].b_x.euclidean(), s.objects[0].t_x.euclidean());
    }));
  for (auto& j : jobs) j.get();
  CHECK(store.get_session(id).at("measurements").size() == 40);
  fs::remove_all(dir);
}

TEST_CASE("http: full flow over a synthetic scene") {
  const fs::path dir = fresh_dir("http");
  Running srv(dir);
  const SyntheticScene s = scene(11, 0.3);

  const std::string id = srv.upload(test::png_header(1920, 1080), "box_10cm");
  auto res = srv.client.Get("/sessions/" + id);
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body).at("image").at("width") == 1920);

  res = srv.client.Post("/sessions/" + id + "/measurements", R"({"b":[1,2],"t":[1,50]})",
                        "application/json");
  REQUIRE(res);
  CHECK(res->status == 409);
  CHECK(json::parse(res->body).at("error").at("code") == "NotCalibrated");

  // One face as JSON, the other as CSV.
  res = srv.client.Put("/sessions/" + id + "/faces/top/correspondences",
                       rows(s.faces[0].correspondences).dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  res = srv.client.Put("/sessions/" + id + "/faces/front/correspondences",
                       format_correspondences_csv(s.faces[1].correspondences), "text/csv");
  REQUIRE(res);
  CHECK(res->status == 200);

  res = srv.client.Post("/sessions/" + id + "/calibrate", R"({"seed": 3})", "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const json cal = json::parse(res->body);
  CHECK(cal.at("faces").at("top").at("inliers") == 25);

  for (const auto& o : s.objects) {
    const Eigen::Vector2d b = o.b_x.euclidean(), t = o.t_x.euclidean();
    res = srv.client.Post("/sessions/" + id + "/measurements",
                          json{{"b", {b.x(), b.y()}}, {"t", {t.x(), t.y()}}}.dump(),
                          "application/json");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    const double z = json::parse(res->body).at("height_mm").get<double>();
    CHECK(std::abs(z - o.height_mm) < 5.0);
  }
  fs::remove_all(dir);
}

TEST_CASE("http: error responses") {
  const fs::path dir = fresh_dir("errors");
  Running srv(dir);

  httplib::MultipartFormDataItems items = {{"image", test::png_header(8, 8), "a.png", "image/png"},
                                           {"reference", "no_such_box", "", ""}};
  auto res = srv.client.Post("/sessions", items);
  REQUIRE(res);
  CHECK(res->status == 404);
  CHECK(json::parse(res->body).at("error").at("code") == "UnknownReference");

  items = {{"image", "plain text", "a.txt", "text/plain"}, {"reference", "box_10cm", "", ""}};
  res = srv.client.Post("/sessions", items);
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(json::parse(res->body).at("error").at("code") == "UndecodableImage");

  res = srv.client.Post("/sessions", "{}", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = srv.client.Get("/sessions/ffffffffffffffffffffffffffffffff");
  REQUIRE(res);
  CHECK(res->status == 404);

  const std::string id = srv.upload(test::png_header(8, 8), "box_10cm");
  res = srv.client.Put("/sessions/" + id + "/faces/top/correspondences", "{not json",
                       "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(json::parse(res->body).at("error").at("code") == "ParseError");

  res = srv.client.Put("/sessions/" + id + "/faces/top/correspondences", "tx,ty,ix,iy\n1,2,x,4\n",
                       "text/csv");
  REQUIRE(res);
  CHECK(res->status == 400);

  // Too few points for a homography.
  res = srv.client.Put("/sessions/" + id + "/faces/top/correspondences",
                       R"({"correspondences":[[0,0,1,1],[1,0,2,1],[0,1,1,2]]})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  res = srv.client.Post("/sessions/" + id + "/calibrate", "", "application/json");
  REQUIRE(res);
  CHECK(res->status == 422);

  res = srv.client.Post("/sessions/" + id + "/calibrate", R"({"confidence": 7})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  fs::remove_all(dir);
}

TEST_CASE("http: replaying a session gives identical results") {
  const SyntheticScene s = scene(13, 0.5);
  std::vector<std::string> bodies;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = fresh_dir("replay");
    Running srv(dir);
    const std::string id = srv.upload(test::png_header(1920, 1080), "box_10cm");
    for (const auto& f : s.faces)
      srv.client.Put("/sessions/" + id + "/faces/" + f.face_id + "/correspondences",
                     rows(f.correspondences).dump(), "application/json");
    auto res = srv.client.Post("/sessions/" + id + "/calibrate", R"({"seed": 99})", "application/json");
    REQUIRE(res);
    std::string transcript = res->body;
    for (const auto& o : s.objects) {
      const Eigen::Vector2d b = o.b_x.euclidean(), t = o.t_x.euclidean();
      res = srv.client.Post("/sessions/" + id + "/measurements",
                            json{{"b", {b.x(), b.y()}}, {"t", {t.x(), t.y()}}}.dump(),
                            "application/json");
      REQUIRE(res);
      transcript += res->body;
    }
    bodies.push_back(transcript);
    fs::remove_all(dir);
  }
  CHECK(bodies[0] == bodies[1]);
}

TEST_CASE("http: low-confidence flag passes through") {
  const fs::path dir = fresh_dir("lowconf");
  SessionStore store(dir, refs());
  const std::string id = store.create_session(test::png_header(1920, 1080), "box_10cm");
  const SyntheticScene s = scene(4);
  for (const auto& f : s.faces) store.put_correspondences(id, f.face_id, f.correspondences);
  const Calibration cal = store.calibrate(id, {});

  // Place the base point so that |unit(l).b| lands between the hard and soft limits.
  const Homog3 l = unit(cal.l);
  const Eigen::Vector2d n(l.a(), l.b());
  const Eigen::Vector2d foot = -l.c() * n / n.squaredNorm();
  const double offset_px = 1e-5 / n.norm();
  const Eigen::Vector2d base = foot + offset_px * n.normalized() + 10 * Eigen::Vector2d(-n.y(), n.x());
  try {
    const Measurement m = store.measure(id, base, base + Eigen::Vector2d(0, -50));
    CHECK(m.low_confidence);
    CHECK(to_json(m).at("low_confidence") == true);
  } catch (const Error& e) {
    FAIL("unexpected error: " << e.what());
  }
  fs::remove_all(dir);
}
