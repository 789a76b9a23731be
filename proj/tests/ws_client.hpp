#pragma once

// Minimal blocking WebSocket/HTTP client standing in for the browser UI.

#include <string>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

namespace wsclient {

namespace asio = boost::asio;
namespace beast = boost::beast;
using tcp = asio::ip::tcp;

class Client {
public:
  explicit Client(unsigned short port) : resolver_(ioc_), ws_(ioc_) {
    const auto results = resolver_.resolve("127.0.0.1", std::to_string(port));
    asio::connect(ws_.next_layer(), results.begin(), results.end());
    ws_.handshake("127.0.0.1", "/");
  }

  void send(const nlohmann::json& msg) {
    ws_.text(true);
    ws_.write(asio::buffer(msg.dump()));
  }
  void send_raw(const std::string& text) {
    ws_.text(true);
    ws_.write(asio::buffer(text));
  }

  nlohmann::json receive() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return nlohmann::json::parse(beast::buffers_to_string(buf.data()));
  }

  // Next message that is not a state frame.
  nlohmann::json receive_control() {
    for (;;) {
      auto m = receive();
      if (m["type"] != "state") return m;
    }
  }

  void close() {
    beast::error_code ec;
    ws_.close(beast::websocket::close_code::normal, ec);
  }

private:
  asio::io_context ioc_;
  tcp::resolver resolver_;
  beast::websocket::stream<tcp::socket> ws_;
};

// Returns {status, body}.
inline std::pair<int, std::string> http_get(unsigned short port, const std::string& target) {
  namespace http = beast::http;
  asio::io_context ioc;
  tcp::resolver resolver(ioc);
  beast::tcp_stream stream(ioc);
  stream.connect(resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::empty_body> req{http::verb::get, target, 11};
  req.set(http::field::host, "127.0.0.1");
  http::write(stream, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(stream, buf, res);
  beast::error_code ec;
  stream.socket().shutdown(tcp::socket::shutdown_both, ec);
  return {static_cast<int>(res.result_int()), res.body()};
}

}  // namespace wsclient
