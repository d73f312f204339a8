#pragma once

// TCP transport for the wire protocol. The server hosts perturbed records and
// their index and answers range, kNN and upload requests; it never sees key
// material (there is no constructor or message that could hand it any).
// One thread per connection; requests on a connection are served in order.

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>

#include "rasp/index_store.h"
#include "rasp/knn.h"
#include "rasp/wire.h"

namespace rasp {

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks a free port
  std::size_t capacity = kDefaultNodeCapacity;  // for uploaded datasets
  SplitPolicy split = SplitPolicy::kRStar;
};

// Answers one decoded request against a store; shared by the socket server
// and tests. Errors come back as ErrorMsg, never as exceptions.
class RequestHandler {
 public:
  explicit RequestHandler(std::shared_ptr<const IndexStore> store, ServerOptions options = {});

  Message handle(const Message& request, bool& knn_open);
  std::shared_ptr<const IndexStore> store() const;

 private:
  Payload dispatch(const Payload& p, bool& knn_open);

  mutable std::mutex mu_;
  std::shared_ptr<const IndexStore> store_;
  ServerOptions options_;
};

class QueryServer {
 public:
  // store may be null; the first UploadDataset then installs one.
  QueryServer(std::shared_ptr<const IndexStore> store, ServerOptions options = {});
  ~QueryServer();
  QueryServer(const QueryServer&) = delete;
  QueryServer& operator=(const QueryServer&) = delete;

  // Binds and starts accepting in the background.
  void start();
  // Closes the listener and every open connection, then joins.
  void stop();
  // Blocks until stop() is called from another thread.
  void wait();

  std::uint16_t port() const noexcept { return port_; }
  std::size_t served_requests() const noexcept { return served_.load(); }

 private:
  struct Connection;
  void accept_loop();
  void serve(std::shared_ptr<Connection> conn);

  RequestHandler handler_;
  ServerOptions options_;
  boost::asio::io_context io_;
  std::unique_ptr<boost::asio::ip::tcp::acceptor> acceptor_;
  std::thread accept_thread_;
  struct Worker {
    std::shared_ptr<Connection> conn;
    std::thread thread;
  };
  // Joins workers whose connection has finished. Caller holds conn_mu_.
  void reap_finished();

  std::mutex conn_mu_;
  std::list<Worker> workers_;
  std::atomic<bool> running_{false};
  std::atomic<std::size_t> served_{0};
  std::uint16_t port_ = 0;
};

// Client side: one connection, one session id, blocking request/response.
class RemoteBackend final : public QueryBackend {
 public:
  RemoteBackend(const std::string& host, std::uint16_t port, std::uint64_t session);
  ~RemoteBackend() override;

  QueryResult range(const SecureRangeQuery& q) override;
  InnerRangeResult inner_range(const KnnRequest& req) override;
  QueryResult outer_range(const SecureRangeQuery& q) override;

  // Replaces the hosted dataset; returns the record count acknowledged.
  std::uint64_t upload(std::vector<PerturbedRecord> records,
                       std::uint32_t capacity = kDefaultNodeCapacity);

  std::uint64_t session() const noexcept { return session_; }
  // Bytes sent and received so far, frames included.
  std::uint64_t bytes_sent() const noexcept { return sent_; }
  std::uint64_t bytes_received() const noexcept { return received_; }

 private:
  Payload call(Payload request);

  boost::asio::io_context io_;
  boost::asio::ip::tcp::socket socket_;
  std::uint64_t session_;
  std::uint64_t sent_ = 0;
  std::uint64_t received_ = 0;
};

// Reads one frame from a blocking socket; returns false on clean EOF before
// the first byte.
bool read_frame(boost::asio::ip::tcp::socket& s, Bytes& frame);
void write_frame(boost::asio::ip::tcp::socket& s, const Bytes& frame);

}  // namespace rasp
