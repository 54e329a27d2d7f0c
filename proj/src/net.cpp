#include "fleet/net.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <deque>

#include "fleet/canonical.hpp"

namespace fleet::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

/// Splits a chunk of wire text into non-empty lines without "\r\n" residue.
std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(std::move(line));
    start = end + 1;
  }
  return out;
}

class LineSession : public std::enable_shared_from_this<LineSession> {
 public:
  LineSession(tcp::socket socket, Simulation& sim) : socket_(std::move(socket)), sim_(sim) {}

  void start() {
    std::weak_ptr<LineSession> weak = shared_from_this();
    conn_ = sim_.attach([weak](const proto::Frame& f) {
      if (auto self = weak.lock()) self->send(proto::encode_frame(f) + "\n");
    });
    read();
  }

 private:
  void read() {
    asio::async_read_until(socket_, buffer_, '\n', [self = shared_from_this()](beast::error_code ec, std::size_t n) {
      if (ec) return self->close();
      std::string chunk(asio::buffers_begin(self->buffer_.data()), asio::buffers_begin(self->buffer_.data()) + n);
      self->buffer_.consume(n);
      for (auto& line : split_lines(chunk)) self->sim_.submit(self->conn_, std::move(line));
      self->read();
    });
  }

  void send(std::string data) {
    if (closed_) return;
    queue_.push_back(std::move(data));
    if (!writing_) write_next();
  }

  void write_next() {
    writing_ = true;
    asio::async_write(socket_, asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->queue_.pop_front();
      if (ec) return self->close();
      if (self->queue_.empty()) {
        self->writing_ = false;
      } else {
        self->write_next();
      }
    });
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    sim_.detach(conn_);
    beast::error_code ignored;
    socket_.close(ignored);
  }

  tcp::socket socket_;
  Simulation& sim_;
  asio::streambuf buffer_;
  std::deque<std::string> queue_;
  bool writing_ = false;
  bool closed_ = false;
  hub::ConnectionId conn_ = 0;
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Simulation& sim) : ws_(std::move(socket)), sim_(sim) {}

  void accept(http::request<http::string_body> req) {
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->ws_.text(true);
      std::weak_ptr<WsSession> weak = self;
      self->conn_ = self->sim_.attach([weak](const proto::Frame& f) {
        if (auto s = weak.lock()) s->send(proto::encode_frame(f));
      });
      self->read();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      const std::string msg = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      for (auto& line : split_lines(msg)) self->sim_.submit(self->conn_, std::move(line));
      self->read();
    });
  }

  void send(std::string data) {
    if (closed_) return;
    queue_.push_back(std::move(data));
    if (!writing_) write_next();
  }

  void write_next() {
    writing_ = true;
    ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->queue_.pop_front();
      if (ec) return self->close();
      if (self->queue_.empty()) {
        self->writing_ = false;
      } else {
        self->write_next();
      }
    });
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    sim_.detach(conn_);
  }

  websocket::stream<beast::tcp_stream> ws_;
  Simulation& sim_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool writing_ = false;
  bool closed_ = false;
  hub::ConnectionId conn_ = 0;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Simulation& sim) : stream_(std::move(socket)), sim_(sim) {}

  void read() {
    req_ = {};
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (websocket::is_upgrade(self->req_)) {
        if (self->req_.target() == "/ws") {
          std::make_shared<WsSession>(self->stream_.release_socket(), self->sim_)->accept(std::move(self->req_));
          return;
        }
      }
      self->respond();
    });
  }

 private:
  void respond() {
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(req_.version());
    res->keep_alive(req_.keep_alive());
    if (req_.method() == http::verb::get && req_.target() == "/snapshot") {
      res->result(http::status::ok);
      res->set(http::field::content_type, "application/json");
      res->body() = canonical_serialize(hub::snapshot_to_json(sim_.hub().snapshot()));
    } else {
      res->result(http::status::not_found);
      res->set(http::field::content_type, "text/plain");
      res->body() = "not found\n";
    }
    res->set(http::field::access_control_allow_origin, "*");
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec || !res->keep_alive()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->read();
    });
  }

  beast::tcp_stream stream_;
  Simulation& sim_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

struct Server::Impl {
  Impl(Simulation& s, ServeOptions o)
      : sim(s),
        opts(std::move(o)),
        http_acceptor(ioc, {asio::ip::make_address(opts.bind), opts.http_port}),
        timer(ioc),
        signals(ioc) {
    if (opts.handle_signals) {
      signals.add(SIGINT);
      signals.add(SIGTERM);
      signals.async_wait([this](beast::error_code ec, int) {
        if (!ec) finish();
      });
    }
    if (opts.tcp_port) tcp_acceptor.emplace(ioc, tcp::endpoint{asio::ip::make_address(opts.bind), *opts.tcp_port});
  }

  void accept_http() {
    http_acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpSession>(std::move(socket), sim)->read();
      accept_http();
    });
  }

  void accept_tcp() {
    tcp_acceptor->async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<LineSession>(std::move(socket), sim)->start();
      accept_tcp();
    });
  }

  void schedule_tick() {
    const double dt = sim.hub().world().tick_dt;
    const auto interval = opts.speed > 0 ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                               std::chrono::duration<double>(dt / opts.speed))
                                         : std::chrono::steady_clock::duration::zero();
    timer.expires_after(interval);
    timer.async_wait([this](beast::error_code ec) {
      if (ec) return;
      sim.tick();
      if ((opts.max_ticks && sim.hub().tick() >= *opts.max_ticks) || (opts.stop_when_done && sim.done())) {
        finish();
        return;
      }
      schedule_tick();
    });
  }

  void finish() {
    if (finished) return;
    finished = true;
    sim.shutdown("server stopped");
    beast::error_code ignored;
    http_acceptor.close(ignored);
    if (tcp_acceptor) tcp_acceptor->close(ignored);
    timer.cancel();
    signals.cancel(ignored);
    ioc.stop();
  }

  Simulation& sim;
  ServeOptions opts;
  asio::io_context ioc;
  tcp::acceptor http_acceptor;
  std::optional<tcp::acceptor> tcp_acceptor;
  asio::steady_timer timer;
  asio::signal_set signals;
  bool finished = false;
};

Server::Server(Simulation& sim, ServeOptions options) : impl_(std::make_unique<Impl>(sim, std::move(options))) {}

Server::~Server() = default;

std::uint16_t Server::http_port() const { return impl_->http_acceptor.local_endpoint().port(); }

std::optional<std::uint16_t> Server::tcp_port() const {
  if (!impl_->tcp_acceptor) return std::nullopt;
  return impl_->tcp_acceptor->local_endpoint().port();
}

void Server::run() {
  impl_->accept_http();
  if (impl_->tcp_acceptor) impl_->accept_tcp();
  impl_->schedule_tick();
  impl_->ioc.run();
}

void Server::stop() {
  asio::post(impl_->ioc, [this] { impl_->finish(); });
}

void serve_lines_over_websocket(const std::string& bind, std::uint16_t port,
                                const std::function<void(const std::function<void(const std::string&)>&)>& produce) {
  asio::io_context ioc;
  tcp::acceptor acceptor(ioc, {asio::ip::make_address(bind), port});
  tcp::socket socket(ioc);
  acceptor.accept(socket);
  websocket::stream<tcp::socket> ws(std::move(socket));
  ws.accept();
  ws.text(true);
  produce([&](const std::string& line) { ws.write(asio::buffer(line)); });
  ws.close(websocket::close_code::normal);
}

}  // namespace fleet::net
