#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "origins/archive.hpp"

namespace origins {

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

using QueryParams = std::multimap<std::string, std::string>;

// Bounded least-recently-used map from request key to response.
class ResponseCache {
 public:
  explicit ResponseCache(std::size_t capacity) : capacity_(capacity) {}

  std::optional<ApiResponse> get(const std::string& key);
  void put(const std::string& key, ApiResponse response);
  std::size_t size() const;

 private:
  using Entry = std::pair<std::string, ApiResponse>;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<Entry> order_;  // most recent first
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
};

// Transport-independent request handling. Every response is a pure function
// of the loaded archive and the request, so responses are cached by key.
// Until load() is called every endpoint answers 503.
class ApiService {
 public:
  explicit ApiService(std::size_t cache_capacity = 256);

  void load(std::shared_ptr<const LoadedArchive> archive);
  bool ready() const { return ready_.load(); }

  ApiResponse handle(std::string_view path, const QueryParams& params);

  std::size_t cache_size() const { return cache_.size(); }

 private:
  ApiResponse dispatch(std::string_view path, const QueryParams& params) const;
  ApiResponse meta() const;
  ApiResponse density(const QueryParams& params) const;
  ApiResponse conflict(const QueryParams& params) const;
  ApiResponse network() const;
  ApiResponse sankey(const QueryParams& params) const;

  std::shared_ptr<const LoadedArchive> archive_;
  std::vector<std::uint8_t> water_;
  std::atomic<bool> ready_{false};
  ResponseCache cache_;
};

// Canonical cache key: path plus parameters in sorted order.
std::string request_key(std::string_view path, const QueryParams& params);

// HTTP/1.1 front end over an ApiService. GET only; CORS is open since the
// UI may be served from another origin.
class HttpServer {
 public:
  HttpServer(ApiService& service, std::optional<std::filesystem::path> static_dir = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and serves on a background thread; port 0 picks a free port.
  // Returns the bound port. Throws IoError when binding fails.
  int start(const std::string& host, int port);
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace origins
