#include "scenewright/gateway/server.hpp"

#include "scenewright/engine.hpp"
#include "scenewright/error.hpp"
#include "scenewright/gateway/replay.hpp"
#include "scenewright/gateway/wire.hpp"
#include "scenewright/llm/wrapper.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <future>
#include <map>
#include <mutex>
#include <thread>

namespace scenewright::gateway {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

std::unique_ptr<llm::LLMProvider> make_provider(const ServerConfig& config) {
  if (config.provider == ProviderKind::Scripted)
    return llm::ScriptedMock::load(config.transcript);
  return std::make_unique<llm::GenericHTTP>(config.http);
}

namespace {

class Connection {
 public:
  virtual ~Connection() = default;
  virtual void start() = 0;
  virtual void send(const WireMessage& message) = 0;
  virtual void close() = 0;
};

struct Session {
  std::string id;
  std::mutex mutex;
  std::weak_ptr<Connection> connection;
  std::uint64_t out_sequence = 0;
  std::optional<std::uint64_t> last_client_sequence;
  std::uint32_t cadence = 5;
  std::uint32_t since_snapshot = 0;
  HistoryQueue history;
  std::atomic<bool> busy{false};
  std::uint64_t requests = 0;
};

}  // namespace

struct Server::Impl {
  ServerConfig config;
  std::unique_ptr<llm::LLMProvider> provider;
  llm::UsageLedger ledger;
  Engine engine;

  asio::io_context io;
  std::optional<asio::executor_work_guard<asio::io_context::executor_type>> work;
  tcp::acceptor tcp_acceptor{io};
  tcp::acceptor ws_acceptor{io};
  std::thread io_thread;
  std::thread loop_thread;

  std::mutex tasks_mutex;
  std::deque<std::function<void()>> tasks;
  bool loop_running = false;

  std::mutex pose_mutex;
  std::map<Hand, HandPose> pose_mailbox;

  std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::vector<std::weak_ptr<Connection>> connections;
  std::uint64_t next_session = 0;

  std::mutex workers_mutex;
  std::vector<std::thread> workers;

  std::mutex state_mutex;
  std::condition_variable stopped_cv;
  bool started = false;
  bool stopped = false;

  Impl(ServerConfig cfg, std::unique_ptr<llm::LLMProvider> p)
      : config(std::move(cfg)),
        provider(std::move(p)),
        engine(config.prefabs ? PrefabRegistry::from_json(read_json(*config.prefabs)) : PrefabRegistry{},
               EngineOptions{config.timestep}) {
    if (config.room_scan) engine.load_room_scan(read_json(*config.room_scan));
  }

  // ---- engine loop --------------------------------------------------------

  bool post(std::function<void()> task) {
    std::lock_guard lock(tasks_mutex);
    if (!loop_running) return false;
    tasks.push_back(std::move(task));
    return true;
  }

  template <typename F>
  auto call_on_loop(F&& fn) -> decltype(fn()) {
    using R = decltype(fn());
    auto promise = std::make_shared<std::promise<R>>();
    auto future = promise->get_future();
    const bool queued = post([promise, fn = std::forward<F>(fn)]() mutable {
      try {
        if constexpr (std::is_void_v<R>) {
          fn();
          promise->set_value();
        } else {
          promise->set_value(fn());
        }
      } catch (...) {
        promise->set_exception(std::current_exception());
      }
    });
    if (!queued) throw Error(ErrorCode::ProviderUnavailable, "server is shutting down");
    return future.get();
  }

  void run_loop() {
    using clock = std::chrono::steady_clock;
    const auto interval = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double, std::milli>(config.tick_interval_ms));
    auto deadline = clock::now();
    while (true) {
      std::deque<std::function<void()>> batch;
      {
        std::lock_guard lock(tasks_mutex);
        if (!loop_running) break;
        batch.swap(tasks);
      }
      for (auto& task : batch) task();
      {
        std::map<Hand, HandPose> poses;
        {
          std::lock_guard lock(pose_mutex);
          poses.swap(pose_mailbox);
        }
        for (const auto& [hand, pose] : poses) engine.update_hand_pose(pose);
      }
      const TickResult result = engine.tick();
      broadcast_events(result.events);
      broadcast_warnings();
      stream_snapshots();

      deadline += interval;
      const auto now = clock::now();
      if (deadline > now) std::this_thread::sleep_for(deadline - now);
      else deadline = now;
    }
    // Whatever was queued after the last tick still runs so no caller waits
    // forever.
    std::deque<std::function<void()>> rest;
    {
      std::lock_guard lock(tasks_mutex);
      rest.swap(tasks);
    }
    for (auto& task : rest) task();
  }

  std::vector<std::shared_ptr<Session>> all_sessions() {
    std::lock_guard lock(sessions_mutex);
    std::vector<std::shared_ptr<Session>> out;
    for (const auto& [_, s] : sessions) out.push_back(s);
    return out;
  }

  void send(Session& session, MessageType type, nlohmann::json body) {
    std::lock_guard lock(session.mutex);
    auto conn = session.connection.lock();
    if (!conn) return;
    WireMessage m;
    m.type = type;
    m.session_id = session.id;
    m.sequence = ++session.out_sequence;
    m.body = std::move(body);
    conn->send(m);
  }

  void warn_session(Session& session, const std::string& message) {
    send(session, MessageType::Warning, {{"message", message}, {"tick", engine_tick.load()}});
  }

  std::atomic<std::uint64_t> engine_tick{0};

  void broadcast_events(const std::vector<AnimationEvent>& events) {
    engine_tick = engine.current_tick();
    std::vector<nlohmann::json> bodies;
    for (const auto& e : events)
      if (e.kind != "progressed") bodies.push_back(e.to_json());
    if (bodies.empty()) return;
    for (const auto& s : all_sessions())
      for (const auto& b : bodies) send(*s, MessageType::Event, b);
  }

  void broadcast_warnings() {
    const auto warnings = engine.take_warnings();
    if (warnings.empty()) return;
    for (const auto& s : all_sessions())
      for (const auto& w : warnings) send(*s, MessageType::Warning, {{"message", w.message}, {"tick", w.tick}});
  }

  void stream_snapshots() {
    std::optional<nlohmann::json> snapshot;
    for (const auto& s : all_sessions()) {
      std::optional<std::uint64_t> ack;
      {
        std::lock_guard lock(s->mutex);
        if (s->connection.expired() || ++s->since_snapshot < s->cadence) continue;
        s->since_snapshot = 0;
        ack = s->last_client_sequence;
      }
      if (!snapshot) snapshot = engine.snapshot().to_json();
      nlohmann::json body = *snapshot;
      body["last_client_sequence"] = ack ? nlohmann::json(*ack) : nlohmann::json(nullptr);
      send(*s, MessageType::Snapshot, std::move(body));
    }
  }

  // ---- sessions -----------------------------------------------------------

  std::shared_ptr<Session> open_session(const std::shared_ptr<Connection>& conn) {
    auto session = std::make_shared<Session>();
    {
      std::lock_guard lock(sessions_mutex);
      session->id = "s" + std::to_string(++next_session);
      session->cadence = config.snapshot_cadence;
      session->connection = conn;
      sessions[session->id] = session;
      std::erase_if(connections, [](const auto& w) { return w.expired(); });
      connections.push_back(conn);
    }
    send(*session, MessageType::ConfigAck,
         {{"session_id", session->id}, {"snapshot_cadence", session->cadence}, {"timestep", config.timestep}});
    return session;
  }

  void close_session(const std::shared_ptr<Session>& session) {
    std::lock_guard lock(sessions_mutex);
    sessions.erase(session->id);
  }

  void on_frame_error(Session& session, const Error& e) { warn_session(session, e.what()); }

  void on_message(const std::shared_ptr<Session>& session, const WireMessage& m) {
    bool fresh = false;
    {
      std::lock_guard lock(session->mutex);
      fresh = !session->last_client_sequence || m.sequence > *session->last_client_sequence;
      if (fresh) session->last_client_sequence = m.sequence;
    }
    // send() takes the session mutex, so the warning goes out after unlocking.
    if (!fresh) {
      warn_session(*session, "sequence " + std::to_string(m.sequence) + " is not greater than the last one; dropped");
      return;
    }
    try {
      handle(session, m);
    } catch (const Error& e) {
      warn_session(*session, e.what());
    } catch (const std::exception& e) {
      warn_session(*session, std::string("internal error: ") + e.what());
    }
  }

  static Hand hand_field(const nlohmann::json& body) {
    std::optional<Hand> h = Hand::Right;
    if (body.is_object() && body.contains("hand"))
      h = body["hand"].is_string() ? hand_from_string(body["hand"].get_ref<const std::string&>()) : std::nullopt;
    if (!h) throw Error(ErrorCode::SchemaViolation, "/body/hand: expected \"left\" or \"right\"");
    return *h;
  }

  void handle(const std::shared_ptr<Session>& session, const WireMessage& m) {
    switch (m.type) {
      case MessageType::UserRequest: {
        if (!m.body.is_object() || !m.body.contains("text") || !m.body["text"].is_string())
          throw Error(ErrorCode::SchemaViolation, "/body/text: expected string");
        if (session->busy.exchange(true)) {
          warn_session(*session, "a request is already in flight for this session");
          return;
        }
        const std::string text = m.body["text"].get<std::string>();
        std::lock_guard lock(workers_mutex);
        workers.emplace_back([this, session, text] { run_request(session, text); });
        return;
      }
      case MessageType::HandPose: {
        HandPose pose = parse_hand_pose(m.body);
        std::lock_guard lock(pose_mutex);
        pose_mailbox[pose.hand] = std::move(pose);
        return;
      }
      case MessageType::Pick: {
        const auto ref = m.body.is_object() && m.body.contains("object") ? parse_object_ref(m.body["object"])
                                                                         : std::nullopt;
        if (!ref) throw Error(ErrorCode::SchemaViolation, "/body/object: expected an object reference");
        const Hand hand = hand_field(m.body);
        post([this, session, ref = *ref, hand] {
          try {
            engine.pick(ref, hand);
          } catch (const Error& e) {
            warn_session(*session, e.what());
          }
        });
        return;
      }
      case MessageType::Release: {
        const Hand hand = hand_field(m.body);
        post([this, hand] { engine.release(hand); });
        return;
      }
      case MessageType::Stop: {
        if (!m.body.is_object() || !m.body.contains("id") || !m.body["id"].is_string())
          throw Error(ErrorCode::SchemaViolation, "/body/id: expected string");
        const std::string id = m.body["id"].get<std::string>();
        post([this, session, id] {
          try {
            broadcast_events(engine.stop_animation(id));
          } catch (const Error& e) {
            warn_session(*session, e.what());
          }
        });
        return;
      }
      case MessageType::Config: {
        if (!m.body.is_object() || !m.body.contains("snapshot_cadence") ||
            !m.body["snapshot_cadence"].is_number_unsigned() || m.body["snapshot_cadence"].get<std::uint64_t>() < 1)
          throw Error(ErrorCode::ConfigInvalid, "/body/snapshot_cadence: expected integer >= 1");
        std::uint32_t cadence = 0;
        {
          std::lock_guard lock(session->mutex);
          session->cadence = static_cast<std::uint32_t>(m.body["snapshot_cadence"].get<std::uint64_t>());
          session->since_snapshot = 0;
          cadence = session->cadence;
        }
        send(*session, MessageType::ConfigAck, {{"session_id", session->id}, {"snapshot_cadence", cadence}});
        return;
      }
      default:
        warn_session(*session, "clients may not send '" + std::string(to_string(m.type)) + "' messages");
        return;
    }
  }

  class SessionEngineAccess : public llm::EngineAccess {
   public:
    SessionEngineAccess(Impl& impl, Session& session) : impl_(impl), session_(session) {}
    ContextPayload retrieve(const std::vector<ContextCategory>& request, const HistoryQueue& history,
                            const std::vector<CommandEnvelope>& pending) override {
      return impl_.call_on_loop([&] {
        return pending.empty() ? impl_.engine.retrieve(request, &history)
                               : impl_.engine.preview(pending).retrieve(request, &history);
      });
    }
    DispatchOutcome dispatch(const CommandEnvelope& command) override {
      return impl_.call_on_loop([&] { return impl_.engine.dispatch(command); });
    }
    void warn(const std::string& message) override { impl_.warn_session(session_, message); }

   private:
    Impl& impl_;
    Session& session_;
  };

  void run_request(const std::shared_ptr<Session>& session, const std::string& text) {
    std::string request_id;
    {
      std::lock_guard lock(session->mutex);
      request_id = session->id + "-" + std::to_string(++session->requests);
    }
    try {
      SessionEngineAccess access(*this, *session);
      llm::Wrapper wrapper(*provider, ledger);
      const auto result = wrapper.handle_request(text, session->history, access, request_id);
      for (const auto& s : result.speech) send(*session, MessageType::Speech, {{"request_id", request_id}, {"text", s}});
      nlohmann::json usage = result.usage.to_json();
      usage["wall_seconds"] = result.wall_seconds;
      send(*session, MessageType::Usage, std::move(usage));
    } catch (const std::exception& e) {
      warn_session(*session, "request '" + request_id + "' failed: " + e.what());
    }
    session->busy = false;
  }

  // ---- listeners ----------------------------------------------------------

  void bind(tcp::acceptor& acceptor, std::uint16_t port) {
    boost::system::error_code ec;
    const auto address = asio::ip::make_address(config.host, ec);
    if (ec) throw Error(ErrorCode::BindFailure, config.host + ": " + ec.message());
    const tcp::endpoint endpoint(address, port);
    acceptor.open(endpoint.protocol(), ec);
    if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(endpoint, ec);
    if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) throw Error(ErrorCode::BindFailure, config.host + ":" + std::to_string(port) + ": " + ec.message());
  }

  void accept_tcp();
  void accept_ws();
};

namespace {

class TcpConnection : public Connection, public std::enable_shared_from_this<TcpConnection> {
 public:
  TcpConnection(Server::Impl& server, tcp::socket socket) : server_(server), socket_(std::move(socket)) {}

  void start() override {
    session_ = server_.open_session(shared_from_this());
    read();
  }

  void send(const WireMessage& message) override {
    std::string frame;
    try {
      frame = encode_frame(message);
    } catch (const Error&) {
      return;
    }
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(frame));
    if (writing_) return;
    writing_ = true;
    asio::post(socket_.get_executor(), [self = shared_from_this()] { self->write_next(); });
  }

  void close() override {
    asio::post(socket_.get_executor(), [self = shared_from_this()] {
      boost::system::error_code ec;
      self->socket_.shutdown(tcp::socket::shutdown_both, ec);
      self->socket_.close(ec);
    });
  }

 private:
  void read() {
    socket_.async_read_some(asio::buffer(buffer_), [self = shared_from_this()](boost::system::error_code ec, std::size_t n) {
      if (ec) {
        self->server_.close_session(self->session_);
        return;
      }
      self->decoder_.feed(std::string_view(self->buffer_.data(), n));
      while (true) {
        try {
          auto message = self->decoder_.next();
          if (!message) break;
          self->server_.on_message(self->session_, *message);
        } catch (const Error& e) {
          self->server_.on_frame_error(*self->session_, e);
        }
      }
      self->read();
    });
  }

  void write_next() {
    std::lock_guard lock(mutex_);
    if (queue_.empty()) {
      writing_ = false;
      return;
    }
    asio::async_write(socket_, asio::buffer(queue_.front()),
                      [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                        {
                          std::lock_guard lock(self->mutex_);
                          self->queue_.pop_front();
                          if (ec) {
                            self->queue_.clear();
                            self->writing_ = false;
                            return;
                          }
                        }
                        self->write_next();
                      });
  }

  Server::Impl& server_;
  tcp::socket socket_;
  std::array<char, 64 * 1024> buffer_{};
  FrameDecoder decoder_;
  std::shared_ptr<Session> session_;
  std::mutex mutex_;
  std::deque<std::string> queue_;
  bool writing_ = false;
};

class WsConnection : public Connection, public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(Server::Impl& server, tcp::socket socket) : server_(server), ws_(std::move(socket)) {}

  void start() override {
    ws_.read_message_max(kMaxFramePayload);
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->session_ = self->server_.open_session(self->shared_from_this());
      self->read();
    });
  }

  void send(const WireMessage& message) override {
    std::lock_guard lock(mutex_);
    queue_.push_back(encode_message(message));
    if (writing_) return;
    writing_ = true;
    asio::post(ws_.get_executor(), [self = shared_from_this()] { self->write_next(); });
  }

  void close() override {
    asio::post(ws_.get_executor(), [self = shared_from_this()] {
      beast::error_code ec;
      beast::get_lowest_layer(self->ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
      beast::get_lowest_layer(self->ws_).close();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->server_.close_session(self->session_);
        return;
      }
      const std::string payload = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      try {
        self->server_.on_message(self->session_, decode_message(payload));
      } catch (const Error& e) {
        self->server_.on_frame_error(*self->session_, e);
      }
      self->read();
    });
  }

  void write_next() {
    std::lock_guard lock(mutex_);
    if (queue_.empty()) {
      writing_ = false;
      return;
    }
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      {
        std::lock_guard lock(self->mutex_);
        self->queue_.pop_front();
        if (ec) {
          self->queue_.clear();
          self->writing_ = false;
          return;
        }
      }
      self->write_next();
    });
  }

  Server::Impl& server_;
  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::shared_ptr<Session> session_;
  std::mutex mutex_;
  std::deque<std::string> queue_;
  bool writing_ = false;
};

}  // namespace

void Server::Impl::accept_tcp() {
  tcp_acceptor.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
    if (ec) return;
    std::make_shared<TcpConnection>(*this, std::move(socket))->start();
    accept_tcp();
  });
}

void Server::Impl::accept_ws() {
  ws_acceptor.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
    if (ec) return;
    std::make_shared<WsConnection>(*this, std::move(socket))->start();
    accept_ws();
  });
}

Server::Server(ServerConfig config, std::unique_ptr<llm::LLMProvider> provider)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(provider))) {}

Server::~Server() { stop(); }

void Server::start() {
  Impl& s = *impl_;
  {
    std::lock_guard lock(s.state_mutex);
    if (s.started) return;
  }
  s.bind(s.tcp_acceptor, s.config.tcp_port);
  if (s.config.ws_port) s.bind(s.ws_acceptor, *s.config.ws_port);
  s.accept_tcp();
  if (s.config.ws_port) s.accept_ws();
  {
    std::lock_guard lock(s.tasks_mutex);
    s.loop_running = true;
  }
  s.work.emplace(asio::make_work_guard(s.io));
  s.io_thread = std::thread([&s] { s.io.run(); });
  s.loop_thread = std::thread([&s] { s.run_loop(); });
  std::lock_guard lock(s.state_mutex);
  s.started = true;
}

void Server::wait() {
  std::unique_lock lock(impl_->state_mutex);
  impl_->stopped_cv.wait(lock, [&] { return impl_->stopped || !impl_->started; });
}

void Server::stop() {
  Impl& s = *impl_;
  {
    std::lock_guard lock(s.state_mutex);
    if (!s.started || s.stopped) return;
  }
  boost::system::error_code ec;
  asio::post(s.io, [&s] {
    boost::system::error_code ignored;
    s.tcp_acceptor.close(ignored);
    s.ws_acceptor.close(ignored);
  });
  {
    std::lock_guard lock(s.tasks_mutex);
    s.loop_running = false;
  }
  if (s.loop_thread.joinable()) s.loop_thread.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(s.workers_mutex);
    workers.swap(s.workers);
  }
  for (auto& w : workers)
    if (w.joinable()) w.join();
  {
    std::lock_guard lock(s.sessions_mutex);
    for (const auto& weak : s.connections)
      if (auto c = weak.lock()) c->close();
    s.sessions.clear();
  }
  s.work.reset();
  s.io.stop();
  if (s.io_thread.joinable()) s.io_thread.join();
  if (s.config.usage_ledger) s.ledger.flush(*s.config.usage_ledger);
  {
    std::lock_guard lock(s.state_mutex);
    s.stopped = true;
  }
  s.stopped_cv.notify_all();
}

std::uint16_t Server::tcp_port() const {
  boost::system::error_code ec;
  const auto ep = impl_->tcp_acceptor.local_endpoint(ec);
  return ec ? impl_->config.tcp_port : ep.port();
}

std::optional<std::uint16_t> Server::ws_port() const {
  if (!impl_->config.ws_port) return std::nullopt;
  boost::system::error_code ec;
  const auto ep = impl_->ws_acceptor.local_endpoint(ec);
  return ec ? *impl_->config.ws_port : ep.port();
}

}  // namespace scenewright::gateway
