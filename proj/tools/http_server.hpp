#pragma once

#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace bw {

class DesignService;

namespace http {

// HTTP front end over a DesignService.
class Server {
 public:
  explicit Server(DesignService& service);
  ~Server();

  // Binds without serving; port 0 picks a free port. Returns the bound port
  // or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();

 private:
  void routes();

  DesignService& service_;
  std::unique_ptr<httplib::Server> server_;
};

int status_for(const std::string& error_code);

}  // namespace http
}  // namespace bw
