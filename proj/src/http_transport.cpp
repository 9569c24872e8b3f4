#include "mqmeval/backends.hpp"

#include <httplib.h>

namespace mqmeval::backends {

namespace {

// Splits http(s)://host[:port]/path into the client base and the path.
bool split_url(const std::string& url, std::string* base, std::string* path) {
  std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) return false;
  std::size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) {
    *base = url;
    *path = "/";
  } else {
    *base = url.substr(0, slash);
    *path = url.substr(slash);
  }
  return true;
}

}  // namespace

Transport httplib_transport() {
  return [](const HttpRequest& req) -> HttpResponse {
    HttpResponse out;
    std::string base, path;
    if (!split_url(req.url, &base, &path)) {
      out.error = "malformed endpoint url: " + req.url;
      return out;
    }
    httplib::Client client(base);
    client.set_connection_timeout(30);
    client.set_read_timeout(600);
    httplib::Headers headers;
    for (const auto& [k, v] : req.headers) headers.emplace(k, v);
    auto result = client.Post(path, headers, req.body, "application/json");
    if (!result) {
      out.error = "transport failure: " + httplib::to_string(result.error());
      return out;
    }
    out.status = result->status;
    out.body = result->body;
    return out;
  };
}

}  // namespace mqmeval::backends
