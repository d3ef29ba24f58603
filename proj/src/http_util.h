// Internal HTTP helpers shared by the remote clients.
#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace httplib {
class Client;
}

namespace artqa::http {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // path prefix, no trailing slash
};

/// Splits "http://host:8080/v1/" into {"http://host:8080", "/v1"}.
/// Throws std::invalid_argument for URLs without a scheme.
Endpoint parse_url(std::string_view url);

std::unique_ptr<httplib::Client> make_client(const Endpoint& endpoint,
                                             double timeout_s);

}  // namespace artqa::http
