#pragma once

// In-process HTTP stand-ins for the remote health and frame scorers.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace mock {

struct ScorerServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> requests{0};
  std::atomic<int> delay_ms{0};

  ScorerServer() {
    using nlohmann::json;
    server.Post("/health", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      if (delay_ms) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms.load()));
      auto texts = json::parse(req.body)["texts"];
      json scores = json::array();
      // Score encodes the text length so ordering can be checked.
      for (const auto& t : texts) scores.push_back(std::min(1.0, t.get<std::string>().size() / 100.0));
      res.set_content(json{{"scores", scores}}.dump(), "application/json");
    });
    server.Post("/frames", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      json frames = json::array();
      for (std::size_t i = 0; i < json::parse(req.body)["texts"].size(); ++i) {
        frames.push_back(json::array({{{"label", "Security and Defense"}, {"confidence", 0.8}}}));
      }
      res.set_content(json{{"frames", frames}}.dump(), "application/json");
    });
    server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~ScorerServer() {
    server.stop();
    thread.join();
  }
  std::string url(const char* path) const { return "http://127.0.0.1:" + std::to_string(port) + path; }
};

}  // namespace mock
