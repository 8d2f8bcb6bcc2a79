#include "frameguard/http.hpp"

#include <httplib.h>

#include "frameguard/error.hpp"

namespace frameguard::http {

Url split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("url '" + url + "' has no scheme");
  auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ValidationError("url '" + url + "': only http and https are supported");
  }
  auto path_start = url.find('/', scheme_end + 3);
  Url out;
  if (path_start == std::string::npos) {
    out.origin = url;
    out.path = "/";
  } else {
    out.origin = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  if (out.origin.size() <= scheme_end + 3) throw ValidationError("url '" + url + "' has no host");
  return out;
}

std::string post_json(const std::string& url, const std::string& body,
                      std::chrono::milliseconds timeout) {
  auto parts = split_url(url);
  httplib::Client client(parts.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  auto res = client.Post(parts.path, body, "application/json");
  if (!res) {
    const auto err = res.error();
    const auto msg = "POST " + url + " failed: " + httplib::to_string(err);
    switch (err) {
      case httplib::Error::ConnectionTimeout:
      case httplib::Error::Read:
      case httplib::Error::Write:
        throw RemoteError(RemoteError::Kind::Timeout, msg);
      default:
        throw RemoteError(RemoteError::Kind::Connection, msg);
    }
  }
  if (res->status < 200 || res->status >= 300) {
    throw RemoteError(RemoteError::Kind::HttpStatus,
                      "POST " + url + " returned HTTP " + std::to_string(res->status), res->status);
  }
  return res->body;
}

}  // namespace frameguard::http
