// The only translation unit touching the network. Everything else takes a
// Transport, so the full test suite runs with fakes and fixtures.
#include "netlens/clients.hpp"

#define CPPHTTPLIB_NO_EXCEPTIONS
#include <httplib.h>

namespace netlens::clients {

Transport http_transport() {
    return [](const std::string& url, const std::string& body,
              const std::string& auth_token) -> std::optional<HttpResponse> {
        auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) return std::nullopt;
        auto path_begin = url.find('/', scheme_end + 3);
        std::string host = url.substr(0, path_begin);
        std::string path = path_begin == std::string::npos ? "/" : url.substr(path_begin);

        httplib::Client client(host);
        client.set_connection_timeout(10);
        client.set_read_timeout(30);
        httplib::Headers headers;
        if (!auth_token.empty()) headers.emplace("Authorization", "Bearer " + auth_token);
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) return std::nullopt;
        return HttpResponse{res->status, res->body};
    };
}

}  // namespace netlens::clients
