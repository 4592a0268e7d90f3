#include "svmetro/session.hpp"

#include <chrono>
#include <ctime>
#include <random>

#include <httplib.h>

#include "svmetro/error.hpp"
#include "svmetro/io.hpp"

namespace svmetro {

using nlohmann::json;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fresh_id() {
  static std::mutex m;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(m);
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

bool valid_id(const std::string& id) {
  if (id.size() != 32) return false;
  for (char c : id)
    if (!std::isxdigit(static_cast<unsigned char>(c)) || std::isupper(static_cast<unsigned char>(c)))
      return false;
  return true;
}

std::uint32_t be32(const std::string& b, std::size_t at) {
  return (static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) << 24) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 8) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3]));
}

int be16(const std::string& b, std::size_t at) {
  return (static_cast<unsigned char>(b[at]) << 8) | static_cast<unsigned char>(b[at + 1]);
}

json corrs_json(const std::vector<Correspondence>& corrs) {
  json rows = json::array();
  for (const auto& c : corrs) rows.push_back({c.templ.x(), c.templ.y(), c.image.x(), c.image.y()});
  return rows;
}

std::vector<Correspondence> corrs_from_json(const json& rows) {
  std::vector<Correspondence> out;
  try {
    for (const auto& r : rows) {
      if (!r.is_array() || r.size() != 4)
        fail(ErrorCode::ParseError, "a correspondence row must be [tx, ty, ix, iy]");
      out.push_back({{r.at(0).get<double>(), r.at(1).get<double>()},
                     {r.at(2).get<double>(), r.at(3).get<double>()}});
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("correspondences: ") + e.what());
  }
  return out;
}

Eigen::Vector2d point_from_json(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != 2 ||
      !j.at(key).at(0).is_number() || !j.at(key).at(1).is_number())
    fail(ErrorCode::BadRequest, std::string("'") + key + "' must be [x, y]");
  return {j.at(key).at(0).get<double>(), j.at(key).at(1).get<double>()};
}

json error_body(ErrorCode code, const std::string& message) {
  return {{"error", {{"code", std::string(to_string(code))}, {"message", message}}}};
}

}  // namespace

ImageInfo inspect_image(const std::string& bytes) {
  static const std::string png_sig("\x89PNG\r\n\x1a\n", 8);
  if (bytes.size() >= 24 && bytes.compare(0, 8, png_sig) == 0 &&
      bytes.compare(12, 4, "IHDR") == 0) {
    const auto w = be32(bytes, 16), h = be32(bytes, 20);
    if (w == 0 || h == 0 || w > 1u << 30 || h > 1u << 30)
      fail(ErrorCode::UndecodableImage, "PNG header has invalid dimensions");
    return {"png", static_cast<int>(w), static_cast<int>(h)};
  }
  if (bytes.size() >= 4 && static_cast<unsigned char>(bytes[0]) == 0xFF &&
      static_cast<unsigned char>(bytes[1]) == 0xD8) {
    std::size_t at = 2;
    while (at + 4 <= bytes.size()) {
      if (static_cast<unsigned char>(bytes[at]) != 0xFF) break;
      const int marker = static_cast<unsigned char>(bytes[at + 1]);
      if (marker == 0xFF) {
        ++at;
        continue;
      }
      if (marker == 0xD8 || (marker >= 0xD0 && marker <= 0xD7) || marker == 0x01) {
        at += 2;
        continue;
      }
      const int len = be16(bytes, at + 2);
      if (len < 2) break;
      const bool sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 &&
                       marker != 0xCC;
      if (sof) {
        if (at + 9 > bytes.size()) break;
        const int h = be16(bytes, at + 5), w = be16(bytes, at + 7);
        if (w == 0 || h == 0) break;
        return {"jpeg", w, h};
      }
      at += 2 + static_cast<std::size_t>(len);
    }
    fail(ErrorCode::UndecodableImage, "JPEG stream has no readable frame header");
  }
  fail(ErrorCode::UndecodableImage, "image is neither PNG nor JPEG");
}

std::map<std::string, ReferenceObject> load_reference_dir(const std::filesystem::path& dir) {
  std::map<std::string, ReferenceObject> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    ReferenceObject ref = load_reference(entry.path());
    out.emplace(ref.name, std::move(ref));
  }
  return out;
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownReference:
      return 404;
    case ErrorCode::NotCalibrated:
      return 409;
    case ErrorCode::ParseError:
    case ErrorCode::BadRequest:
    case ErrorCode::ValidationError:
    case ErrorCode::UndecodableImage:
      return 400;
    default:
      return 422;
  }
}

// ---------------------------------------------------------------------------
// SessionStore

SessionStore::SessionStore(std::filesystem::path data_dir,
                           std::map<std::string, ReferenceObject> references)
    : data_dir_(std::move(data_dir)), references_(std::move(references)) {
  std::filesystem::create_directories(data_dir_);
}

std::shared_ptr<std::mutex> SessionStore::lock_for(const std::string& id) {
  std::lock_guard guard(locks_mutex_);
  auto& slot = locks_[id];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

std::filesystem::path SessionStore::session_path(const std::string& id) const {
  return data_dir_ / (id + ".json");
}

json SessionStore::load(const std::string& id) const {
  if (!valid_id(id) || !std::filesystem::exists(session_path(id)))
    fail(ErrorCode::UnknownSession, "no session '" + id + "'");
  return json::parse(read_file(session_path(id)));
}

void SessionStore::save(const json& doc) const {
  write_file_atomic(session_path(doc.at("id").get<std::string>()), dump(doc));
}

const ReferenceObject& SessionStore::reference_of(const json& doc) const {
  const auto name = doc.at("reference").get<std::string>();
  auto it = references_.find(name);
  if (it == references_.end())
    fail(ErrorCode::UnknownReference, "reference '" + name + "' is not known to this server");
  return it->second;
}

std::string SessionStore::create_session(const std::string& image_bytes,
                                         const std::string& reference) {
  if (!references_.count(reference))
    fail(ErrorCode::UnknownReference, "reference '" + reference + "' is not known to this server");
  const ImageInfo info = inspect_image(image_bytes);

  const std::string id = fresh_id();
  auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  const std::string image_file = id + ".img";
  write_file_atomic(data_dir_ / image_file, image_bytes);
  const std::string now = utc_now();
  save({{"id", id},
        {"reference", reference},
        {"image",
         {{"file", image_file},
          {"format", info.format},
          {"width", info.width},
          {"height", info.height},
          {"size_bytes", image_bytes.size()}}},
        {"correspondences", json::object()},
        {"ransac", nullptr},
        {"calibration", nullptr},
        {"measurements", json::array()},
        {"created", now},
        {"updated", now}});
  return id;
}

json SessionStore::get_session(const std::string& id) {
  auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  return load(id);
}

json SessionStore::put_correspondences(const std::string& id, const std::string& face_id,
                                       const std::vector<Correspondence>& corrs) {
  auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  json doc = load(id);
  const ReferenceObject& ref = reference_of(doc);
  if (ref.find_face(face_id) == nullptr)
    fail(ErrorCode::ValidationError,
         "reference '" + ref.name + "' has no face '" + face_id + "'");
  doc["correspondences"][face_id] = corrs_json(corrs);
  doc["calibration"] = nullptr;
  doc["measurements"] = json::array();
  doc["updated"] = utc_now();
  save(doc);
  return doc;
}

Calibration SessionStore::calibrate(const std::string& id, const RansacConfig& cfg) {
  auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  json doc = load(id);
  const ReferenceObject& ref = reference_of(doc);
  CorrespondenceMap corrs;
  for (const auto& [face, rows] : doc.at("correspondences").items())
    corrs[face] = corrs_from_json(rows);

  const Calibration cal = svmetro::calibrate(ref, corrs, cfg);
  doc["ransac"] = to_json(cfg);
  doc["calibration"] = to_json(cal);
  doc["measurements"] = json::array();
  doc["updated"] = utc_now();
  save(doc);
  // Hand back exactly what later requests will read from disk.
  return calibration_from_json(doc["calibration"]);
}

Measurement SessionStore::measure(const std::string& id, const Eigen::Vector2d& base,
                                  const Eigen::Vector2d& top) {
  auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  json doc = load(id);
  if (doc.at("calibration").is_null())
    fail(ErrorCode::NotCalibrated, "session has no calibration; POST /calibrate first");
  const Calibration cal = calibration_from_json(doc.at("calibration"));
  const Measurement m = measure_height(cal, Homog3::point(base), Homog3::point(top));
  doc["measurements"].push_back(to_json(m));
  doc["updated"] = utc_now();
  save(doc);
  return m;
}

// ---------------------------------------------------------------------------
// SessionServer

SessionServer::SessionServer(SessionStore& store, std::filesystem::path static_dir)
    : store_(store), static_dir_(std::move(static_dir)), server_(std::make_unique<httplib::Server>()) {
  routes();
}

SessionServer::~SessionServer() { stop(); }

int SessionServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  if (!server_->bind_to_port(host, port))
    fail(ErrorCode::BadRequest, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void SessionServer::listen() { server_->listen_after_bind(); }

void SessionServer::start() {
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void SessionServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void SessionServer::routes() {
  using httplib::Request;
  using httplib::Response;

  auto reply = [](Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  };
  // Every handler reports library errors as {error: {code, message}}.
  auto guarded = [reply](auto handler) {
    return [handler, reply](const Request& req, Response& res) {
      try {
        handler(req, res);
      } catch (const Error& e) {
        reply(res, http_status(e.code()), error_body(e.code(), e.what()));
      } catch (const json::exception& e) {
        reply(res, 400, error_body(ErrorCode::BadRequest, e.what()));
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(json{{"error", {{"code", "Internal"}, {"message", e.what()}}}}.dump(),
                        "application/json");
      }
    };
  };
  auto body_json = [](const Request& req) {
    if (req.body.empty()) return json();
    try {
      return json::parse(req.body);
    } catch (const json::exception& e) {
      fail(ErrorCode::ParseError, std::string("request body is not JSON: ") + e.what());
    }
  };

  server_->Post("/sessions", guarded([this, reply](const Request& req, Response& res) {
    if (!req.is_multipart_form_data() || !req.has_file("image") || !req.has_file("reference"))
      fail(ErrorCode::BadRequest, "expected multipart fields 'image' and 'reference'");
    const std::string id = store_.create_session(req.get_file_value("image").content,
                                                 req.get_file_value("reference").content);
    reply(res, 200, store_.get_session(id));
  }));

  server_->Get(R"(/sessions/([^/]+))", guarded([this, reply](const Request& req, Response& res) {
    reply(res, 200, store_.get_session(req.matches[1]));
  }));

  server_->Put(R"(/sessions/([^/]+)/faces/([^/]+)/correspondences)",
               guarded([this, reply, body_json](const Request& req, Response& res) {
                 std::vector<Correspondence> corrs;
                 const std::string type = req.get_header_value("Content-Type");
                 if (type.rfind("text/csv", 0) == 0) {
                   corrs = parse_correspondences_csv(req.body);
                 } else {
                   const json body = body_json(req);
                   if (!body.is_object() || !body.contains("correspondences"))
                     fail(ErrorCode::BadRequest, "expected {\"correspondences\": [[tx,ty,ix,iy], ...]}");
                   corrs = corrs_from_json(body.at("correspondences"));
                 }
                 reply(res, 200, store_.put_correspondences(req.matches[1], req.matches[2], corrs));
               }));

  server_->Post(R"(/sessions/([^/]+)/calibrate)",
                guarded([this, reply, body_json](const Request& req, Response& res) {
                  const RansacConfig cfg = ransac_config_from_json(body_json(req));
                  reply(res, 200, to_json(store_.calibrate(req.matches[1], cfg)));
                }));

  server_->Post(R"(/sessions/([^/]+)/measurements)",
                guarded([this, reply, body_json](const Request& req, Response& res) {
                  const json body = body_json(req);
                  if (!body.is_object()) fail(ErrorCode::BadRequest, "expected {\"b\": [x,y], \"t\": [x,y]}");
                  const Measurement m = store_.measure(req.matches[1], point_from_json(body, "b"),
                                                       point_from_json(body, "t"));
                  reply(res, 200, to_json(m));
                }));

  if (!static_dir_.empty() && std::filesystem::is_directory(static_dir_))
    server_->set_mount_point("/", static_dir_.string());
}

}  // namespace svmetro
