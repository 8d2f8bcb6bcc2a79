#pragma once

#include <chrono>
#include <string>

namespace frameguard::http {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // begins with '/'
};

// Throws ValidationError for anything that is not http(s)://host[:port][/path].
Url split_url(const std::string& url);

// POSTs a JSON body and returns the response body. Connection, read and write
// timeouts are all set to `timeout`. Throws RemoteError (timeout, connection,
// non-2xx status).
std::string post_json(const std::string& url, const std::string& body,
                      std::chrono::milliseconds timeout);

}  // namespace frameguard::http
