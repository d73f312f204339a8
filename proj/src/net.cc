#include "rasp/net.h"

#include <array>
#include <cstring>

#include <boost/asio/connect.hpp>
#include <boost/asio/read.hpp>
#include <boost/asio/write.hpp>

namespace rasp {

namespace asio = boost::asio;
using asio::ip::tcp;

bool read_frame(tcp::socket& s, Bytes& frame) {
  std::array<std::uint8_t, 4> prefix{};
  boost::system::error_code ec;
  const std::size_t got = asio::read(s, asio::buffer(prefix), ec);
  if (ec == asio::error::eof && got == 0) return false;
  if (ec) throw Error(ErrorCode::kIo, "read failed: " + ec.message());
  const std::uint32_t len = frame_length(std::span<const std::uint8_t, 4>(prefix));
  frame.resize(4 + static_cast<std::size_t>(len));
  std::memcpy(frame.data(), prefix.data(), 4);
  asio::read(s, asio::buffer(frame.data() + 4, len), ec);
  if (ec) throw Error(ErrorCode::kIo, "read failed mid-frame: " + ec.message());
  return true;
}

void write_frame(tcp::socket& s, const Bytes& frame) {
  boost::system::error_code ec;
  asio::write(s, asio::buffer(frame), ec);
  if (ec) throw Error(ErrorCode::kIo, "write failed: " + ec.message());
}

// ---- request handling ------------------------------------------------------

RequestHandler::RequestHandler(std::shared_ptr<const IndexStore> store, ServerOptions options)
    : store_(std::move(store)), options_(std::move(options)) {}

std::shared_ptr<const IndexStore> RequestHandler::store() const {
  std::lock_guard lock(mu_);
  return store_;
}

Message RequestHandler::handle(const Message& request, bool& knn_open) {
  Message reply;
  reply.session = request.session;
  try {
    reply.payload = dispatch(request.payload, knn_open);
  } catch (const Error& e) {
    reply.payload = ErrorMsg{e.code(), e.what()};
  } catch (const std::exception& e) {
    reply.payload = ErrorMsg{ErrorCode::kInternal, e.what()};
  }
  return reply;
}

Payload RequestHandler::dispatch(const Payload& p, bool& knn_open) {
  if (const auto* up = std::get_if<UploadDataset>(&p)) {
    auto fresh = std::make_shared<const IndexStore>(
        up->records, up->capacity == 0 ? options_.capacity : up->capacity, options_.split);
    const auto n = fresh->size();
    std::lock_guard lock(mu_);
    store_ = std::move(fresh);
    return UploadAck{n};
  }
  const auto snapshot = store();
  enforce(snapshot != nullptr, ErrorCode::kInvalidArgument, "no dataset hosted yet");
  if (const auto* rq = std::get_if<RangeQueryMsg>(&p)) {
    return to_message(snapshot->two_stage_query(rq->query));
  }
  if (const auto* init = std::get_if<KnnInit>(&p)) {
    // The outer request is legal after any init, including one that failed
    // with kNeedLargerUpperBound.
    knn_open = true;
    return KnnInner{k_delta_range_search(*snapshot, init->request)};
  }
  if (const auto* outer = std::get_if<KnnOuter>(&p)) {
    enforce(knn_open, ErrorCode::kMalformedMessage, "KnnOuter without a preceding KnnInit");
    knn_open = false;
    return to_candidates(snapshot->two_stage_query(outer->query));
  }
  throw Error(ErrorCode::kMalformedMessage,
              "message type " + std::to_string(static_cast<int>(tag_of(p))) +
                  " is not a request");
}

// ---- server ----------------------------------------------------------------

struct QueryServer::Connection {
  explicit Connection(tcp::socket s) : socket(std::move(s)) {}
  tcp::socket socket;
  std::mutex mu;
  bool closed = false;
  std::atomic<bool> finished{false};

  void close() {
    std::lock_guard lock(mu);
    if (closed) return;
    closed = true;
    boost::system::error_code ec;
    socket.shutdown(tcp::socket::shutdown_both, ec);
  }
};

QueryServer::QueryServer(std::shared_ptr<const IndexStore> store, ServerOptions options)
    : handler_(std::move(store), options), options_(std::move(options)) {}

QueryServer::~QueryServer() { stop(); }

void QueryServer::start() {
  enforce(!running_.load(), ErrorCode::kInvalidArgument, "server already running");
  boost::system::error_code ec;
  const auto addr = asio::ip::make_address(options_.host, ec);
  enforce(!ec, ErrorCode::kInvalidArgument, "bad listen address '" + options_.host + "'");
  acceptor_ = std::make_unique<tcp::acceptor>(io_);
  const tcp::endpoint ep(addr, options_.port);
  acceptor_->open(ep.protocol(), ec);
  if (!ec) acceptor_->set_option(tcp::acceptor::reuse_address(true), ec);
  if (!ec) acceptor_->bind(ep, ec);
  if (!ec) acceptor_->listen(asio::socket_base::max_listen_connections, ec);
  enforce(!ec, ErrorCode::kIo, "cannot listen on " + options_.host + ":" +
                                   std::to_string(options_.port) + ": " + ec.message());
  port_ = acceptor_->local_endpoint().port();
  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void QueryServer::accept_loop() {
  while (running_.load()) {
    tcp::socket s(io_);
    boost::system::error_code ec;
    acceptor_->accept(s, ec);
    if (ec) {
      if (!running_.load()) break;
      continue;
    }
    auto conn = std::make_shared<Connection>(std::move(s));
    std::lock_guard lock(conn_mu_);
    if (!running_.load()) {
      conn->close();
      break;
    }
    reap_finished();
    workers_.push_back({conn, std::thread([this, conn] { serve(conn); })});
  }
}

void QueryServer::reap_finished() {
  for (auto it = workers_.begin(); it != workers_.end();) {
    if (it->conn->finished.load()) {
      it->thread.join();
      it = workers_.erase(it);
    } else {
      ++it;
    }
  }
}

void QueryServer::serve(std::shared_ptr<Connection> conn) {
  bool knn_open = false;
  std::uint64_t session = 0;
  bool have_session = false;
  Bytes frame;
  try {
    while (read_frame(conn->socket, frame)) {
      Message reply;
      bool fatal = false;
      try {
        const Message req = decode_message(frame);
        if (!have_session) {
          session = req.session;
          have_session = true;
        }
        if (req.session != session) {
          reply = Message{req.session, ErrorMsg{ErrorCode::kMalformedMessage,
                                                "session id changed on an open connection"}};
        } else {
          reply = handler_.handle(req, knn_open);
        }
      } catch (const Error& e) {
        // Framing is intact but the body is not; report and drop the link.
        reply = Message{session, ErrorMsg{e.code(), e.what()}};
        fatal = true;
      }
      // Count before replying so a client that has its answer sees the tally.
      ++served_;
      write_frame(conn->socket, encode_message(reply));
      if (fatal) break;
    }
  } catch (const Error&) {
    // Peer vanished or sent an impossible length; nothing left to answer.
  }
  conn->close();
  conn->finished = true;
}

void QueryServer::stop() {
  if (!running_.exchange(false)) {
    if (accept_thread_.joinable()) accept_thread_.join();
    return;
  }
  boost::system::error_code ec;
  // Wake the blocking accept with a throwaway connection, then close.
  {
    asio::io_context io;
    tcp::socket poke(io);
    const auto addr = acceptor_->local_endpoint().address();
    const auto any = addr.is_unspecified() ? asio::ip::make_address("127.0.0.1") : addr;
    poke.connect(tcp::endpoint(any, port_), ec);
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  acceptor_->close(ec);
  std::list<Worker> workers;
  {
    std::lock_guard lock(conn_mu_);
    for (auto& w : workers_) w.conn->close();
    workers.swap(workers_);
  }
  for (auto& w : workers) w.thread.join();
}

void QueryServer::wait() {
  while (running_.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

// ---- client ----------------------------------------------------------------

RemoteBackend::RemoteBackend(const std::string& host, std::uint16_t port, std::uint64_t session)
    : socket_(io_), session_(session) {
  tcp::resolver resolver(io_);
  boost::system::error_code ec;
  const auto endpoints = resolver.resolve(host, std::to_string(port), ec);
  enforce(!ec, ErrorCode::kIo, "cannot resolve " + host + ": " + ec.message());
  asio::connect(socket_, endpoints, ec);
  enforce(!ec, ErrorCode::kIo,
          "cannot connect to " + host + ":" + std::to_string(port) + ": " + ec.message());
  socket_.set_option(tcp::no_delay(true), ec);
}

RemoteBackend::~RemoteBackend() {
  boost::system::error_code ec;
  socket_.shutdown(tcp::socket::shutdown_both, ec);
  socket_.close(ec);
}

Payload RemoteBackend::call(Payload request) {
  const Bytes out = encode_message(Message{session_, std::move(request)});
  write_frame(socket_, out);
  sent_ += out.size();
  Bytes in;
  enforce(read_frame(socket_, in), ErrorCode::kIo, "server closed the connection");
  received_ += in.size();
  Message reply = decode_message(in);
  enforce(reply.session == session_, ErrorCode::kMalformedMessage, "reply for another session");
  if (auto* err = std::get_if<ErrorMsg>(&reply.payload)) throw Error(err->code, err->message);
  return std::move(reply.payload);
}

namespace {
template <typename T>
T expect(Payload p, const char* what) {
  auto* v = std::get_if<T>(&p);
  enforce(v != nullptr, ErrorCode::kMalformedMessage, std::string("expected ") + what + " reply");
  return std::move(*v);
}
}  // namespace

QueryResult RemoteBackend::range(const SecureRangeQuery& q) {
  return from_message(expect<RangeResultMsg>(call(RangeQueryMsg{q}), "RangeResult"));
}

InnerRangeResult RemoteBackend::inner_range(const KnnRequest& req) {
  return expect<KnnInner>(call(KnnInit{req}), "KnnInner").result;
}

QueryResult RemoteBackend::outer_range(const SecureRangeQuery& q) {
  return from_candidates(expect<KnnCandidates>(call(KnnOuter{q}), "KnnCandidates"));
}

std::uint64_t RemoteBackend::upload(std::vector<PerturbedRecord> records, std::uint32_t capacity) {
  return expect<UploadAck>(call(UploadDataset{std::move(records), capacity}), "UploadAck").records;
}

}  // namespace rasp
