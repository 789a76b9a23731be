#include "demodrive/teleop_server.hpp"

#include <chrono>
#include <deque>
#include <map>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "demodrive/errors.hpp"

namespace demodrive {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

class WsConnection;

struct TeleopServer::Impl : std::enable_shared_from_this<TeleopServer::Impl> {
  asio::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  asio::steady_timer timer{ioc};
  std::unique_ptr<TeleopSession> session;
  TeleopServerOptions options;
  std::map<ClientId, std::weak_ptr<WsConnection>> clients;
  ClientId next_id = 1;
  std::chrono::steady_clock::time_point tick_origin;
  long tick_count = 0;
  unsigned short bound_port = 0;
  bool stopping = false;

  void accept();
  void schedule_tick();
  void deliver(const std::vector<Outgoing>& messages);
  void on_message(ClientId id, const std::string& text) { deliver(session->handle_message(id, text)); }
  void on_disconnect(ClientId id);
  void shutdown();
};

class WsConnection : public std::enable_shared_from_this<WsConnection> {
public:
  WsConnection(tcp::socket&& socket, std::shared_ptr<TeleopServer::Impl> server, ClientId id)
      : ws_(std::move(socket)), server_(std::move(server)), id_(id) {}

  void start(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->server_->clients[self->id_] = self;
      self->server_->session->connect(self->id_);
      self->read();
    });
  }

  void send(std::shared_ptr<const std::string> text) {
    if (closing_) return;
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) write_next();
  }

  void close() {
    closing_ = true;
    if (queue_.empty()) do_close();
  }

private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->gone();
        return;
      }
      std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      if (self->ws_.got_text()) {
        self->server_->on_message(self->id_, text);
      } else {
        self->send(std::make_shared<const std::string>(R"({"type":"error","code":"malformed_message"})"));
      }
      self->read();
    });
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(asio::buffer(*queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->queue_.clear();
        self->gone();
        return;
      }
      self->queue_.pop_front();
      if (!self->queue_.empty()) {
        self->write_next();
      } else if (self->closing_) {
        self->do_close();
      }
    });
  }

  void do_close() {
    if (close_sent_) return;
    close_sent_ = true;
    ws_.async_close(websocket::close_code::going_away, [self = shared_from_this()](beast::error_code) { self->gone(); });
  }

  void gone() {
    if (gone_) return;
    gone_ = true;
    server_->on_disconnect(id_);
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::shared_ptr<TeleopServer::Impl> server_;
  ClientId id_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  bool closing_ = false;
  bool close_sent_ = false;
  bool gone_ = false;
};

// Reads one HTTP request, then either upgrades to WebSocket or answers it.
class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
public:
  HttpConnection(tcp::socket&& socket, std::shared_ptr<TeleopServer::Impl> server)
      : stream_(std::move(socket)), server_(std::move(server)) {}

  void start() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->dispatch();
    });
  }

private:
  void dispatch() {
    if (websocket::is_upgrade(req_)) {
      if (server_->stopping) return;
      stream_.expires_never();
      auto ws = std::make_shared<WsConnection>(stream_.release_socket(), server_, server_->next_id++);
      ws->start(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(req_.version());
    res->keep_alive(false);
    res->set(http::field::access_control_allow_origin, "*");
    if (req_.method() == http::verb::get && req_.target() == "/track") {
      res->result(http::status::ok);
      res->set(http::field::content_type, "application/json");
      res->body() = server_->session->env().track().to_json().dump();
    } else {
      res->result(http::status::not_found);
      res->set(http::field::content_type, "text/plain");
      res->body() = "not found\n";
    }
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  std::shared_ptr<TeleopServer::Impl> server_;
};

void TeleopServer::Impl::accept() {
  acceptor.async_accept(asio::make_strand(ioc), [self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<HttpConnection>(std::move(socket), self)->start();
    self->accept();
  });
}

void TeleopServer::Impl::schedule_tick() {
  // Deadlines are fixed multiples of the period, so wall-clock jitter never
  // accumulates; the sim itself only ever sees whole dt steps.
  const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / options.tick_hz));
  timer.expires_at(tick_origin + period * (tick_count + 1));
  timer.async_wait([self = shared_from_this()](beast::error_code ec) {
    if (ec || self->stopping) return;
    ++self->tick_count;
    self->deliver(self->session->tick());
    self->schedule_tick();
  });
}

void TeleopServer::Impl::deliver(const std::vector<Outgoing>& messages) {
  for (const Outgoing& m : messages) {
    auto text = std::make_shared<const std::string>(m.text);
    if (m.to) {
      if (auto it = clients.find(*m.to); it != clients.end()) {
        if (auto c = it->second.lock()) c->send(text);
      }
      continue;
    }
    for (auto& [_, weak] : clients) {
      if (auto c = weak.lock()) c->send(text);
    }
  }
}

void TeleopServer::Impl::on_disconnect(ClientId id) {
  if (clients.erase(id) == 0) return;
  deliver(session->disconnect(id));
}

void TeleopServer::Impl::shutdown() {
  if (stopping) return;
  stopping = true;
  beast::error_code ignored;
  acceptor.close(ignored);
  timer.cancel();
  deliver(session->flush());
  for (auto& [_, weak] : clients) {
    if (auto c = weak.lock()) c->close();
  }
}

TeleopServer::TeleopServer(std::unique_ptr<TeleopSession> session, TeleopServerOptions options)
    : impl_(std::make_shared<Impl>()) {
  if (!session) throw ArgumentError("teleop server needs a session");
  if (!(options.tick_hz > 0.0)) throw ArgumentError("tick rate must be positive");
  impl_->session = std::move(session);
  impl_->options = options;
  try {
    const tcp::endpoint endpoint(asio::ip::make_address(options.address), options.port);
    impl_->acceptor.open(endpoint.protocol());
    impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
    impl_->acceptor.bind(endpoint);
    impl_->acceptor.listen(asio::socket_base::max_listen_connections);
    impl_->bound_port = impl_->acceptor.local_endpoint().port();
  } catch (const boost::system::system_error& e) {
    throw IoError("cannot listen on " + options.address + ":" + std::to_string(options.port) + ": " + e.what());
  }
}

TeleopServer::~TeleopServer() = default;

unsigned short TeleopServer::port() const { return impl_->bound_port; }

void TeleopServer::run() {
  impl_->tick_origin = std::chrono::steady_clock::now();
  impl_->accept();
  impl_->schedule_tick();
  impl_->ioc.run();
  // Connections that never finished their handshake hold no session state.
  impl_->clients.clear();
}

void TeleopServer::stop() {
  asio::post(impl_->ioc, [impl = impl_] { impl->shutdown(); });
}

const TeleopSession& TeleopServer::session() const { return *impl_->session; }

}  // namespace demodrive
