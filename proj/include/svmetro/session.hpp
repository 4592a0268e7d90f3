#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <json.hpp>

#include "svmetro/error.hpp"
#include "svmetro/metrology.hpp"
#include "svmetro/reference.hpp"

namespace httplib {
class Server;
}

namespace svmetro {

struct ImageInfo {
  std::string format;  // "png" or "jpeg"
  int width = 0;
  int height = 0;
};

//! Header-only validation of PNG/JPEG bytes. Throws UndecodableImage.
ImageInfo inspect_image(const std::string& bytes);

//! @brief Disk-backed session state: one JSON document per session plus the
//! uploaded image bytes, both written with temp-file-then-rename.
//!
//! Requests against one session are serialized; different sessions proceed in
//! parallel.
class SessionStore {
 public:
  SessionStore(std::filesystem::path data_dir, std::map<std::string, ReferenceObject> references);

  std::string create_session(const std::string& image_bytes, const std::string& reference);
  nlohmann::json get_session(const std::string& id);

  //! Replaces the face's correspondences. A stored calibration and its
  //! measurements no longer match and are dropped.
  nlohmann::json put_correspondences(const std::string& id, const std::string& face_id,
                                     const std::vector<Correspondence>& corrs);
  Calibration calibrate(const std::string& id, const RansacConfig& cfg);
  Measurement measure(const std::string& id, const Eigen::Vector2d& base,
                      const Eigen::Vector2d& top);

  const std::map<std::string, ReferenceObject>& references() const { return references_; }

 private:
  std::shared_ptr<std::mutex> lock_for(const std::string& id);
  std::filesystem::path session_path(const std::string& id) const;
  nlohmann::json load(const std::string& id) const;
  void save(const nlohmann::json& doc) const;
  const ReferenceObject& reference_of(const nlohmann::json& doc) const;

  std::filesystem::path data_dir_;
  std::map<std::string, ReferenceObject> references_;
  std::mutex locks_mutex_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

//! Loads every *.json reference spec in @p dir, keyed by name.
std::map<std::string, ReferenceObject> load_reference_dir(const std::filesystem::path& dir);

//! HTTP status for an error code.
int http_status(ErrorCode code);

//! @brief HTTP/1.1 JSON front end over a SessionStore.
class SessionServer {
 public:
  SessionServer(SessionStore& store, std::filesystem::path static_dir = {});
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  //! Binds (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  //! Blocks until stop().
  void listen();
  //! Serves on a background thread.
  void start();
  void stop();

 private:
  void routes();

  SessionStore& store_;
  std::filesystem::path static_dir_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace svmetro
