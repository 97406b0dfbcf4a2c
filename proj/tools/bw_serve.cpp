#include <csignal>
#include <cstdlib>
#include <iostream>
#include <string>

#include "blockweave/service.hpp"
#include "http_server.hpp"

namespace {

bw::http::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

// Configuration comes from the environment: BW_DATA_DIR (default ./bw-data)
// and BW_BIND_ADDR (host:port, default 127.0.0.1:8080; port 0 picks one).
int main() {
  const char* data = std::getenv("BW_DATA_DIR");
  const char* bind = std::getenv("BW_BIND_ADDR");
  const std::string data_dir = data && *data ? data : "bw-data";
  std::string addr = bind && *bind ? bind : "127.0.0.1:8080";

  const auto colon = addr.rfind(':');
  const std::string host = colon == std::string::npos ? addr : addr.substr(0, colon);
  int port = 8080;
  try {
    if (colon != std::string::npos) port = std::stoi(addr.substr(colon + 1));
  } catch (const std::exception&) {
    std::cerr << "bw-serve: bad BW_BIND_ADDR '" << addr << "'\n";
    return 2;
  }

  try {
    bw::DesignService service(data_dir);
    for (const auto& w : service.library().load_warnings()) std::cerr << "bw-serve: " << w << "\n";
    bw::http::Server server(service);
    const int bound = server.bind(host, port);
    if (bound < 0) {
      std::cerr << "bw-serve: cannot bind " << addr << "\n";
      return 1;
    }
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "listening on http://" << host << ":" << bound << std::endl;
    server.listen();
    g_server = nullptr;
  } catch (const std::exception& e) {
    std::cerr << "bw-serve: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
