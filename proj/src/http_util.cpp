#include "http_util.h"

#include <stdexcept>

#include <httplib.h>

namespace artqa::http {

Endpoint parse_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw std::invalid_argument("URL needs a scheme: " + std::string(url));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint out;
  if (path_start == std::string_view::npos) {
    out.origin = std::string(url);
  } else {
    out.origin = std::string(url.substr(0, path_start));
    out.path = std::string(url.substr(path_start));
  }
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

std::unique_ptr<httplib::Client> make_client(const Endpoint& endpoint,
                                             double timeout_s) {
  auto client = std::make_unique<httplib::Client>(endpoint.origin);
  const auto seconds = static_cast<time_t>(timeout_s);
  const auto micros = static_cast<time_t>((timeout_s - static_cast<double>(seconds)) * 1e6);
  client->set_connection_timeout(seconds, micros);
  client->set_read_timeout(seconds, micros);
  client->set_write_timeout(seconds, micros);
  return client;
}

}  // namespace artqa::http
