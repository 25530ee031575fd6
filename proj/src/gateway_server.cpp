#include "etaxi/errors.hpp"
#include "etaxi/gateway.hpp"

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <deque>

namespace etaxi {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

constexpr std::size_t kMaxQueued = 4096;  // a client this far behind is dropped

class StreamSession : public std::enable_shared_from_this<StreamSession> {
public:
    StreamSession(tcp::socket&& socket, std::shared_ptr<Run> run) : ws_(std::move(socket)), run_(std::move(run)) {}

    void start(http::request<http::string_body> req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, beast::bind_front_handler(&StreamSession::on_accept, shared_from_this()));
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        std::weak_ptr<StreamSession> weak = shared_from_this();
        token_ = run_->subscribe(
            [weak](std::shared_ptr<const std::string> msg) {
                if (auto self = weak.lock())
                    net::post(self->ws_.get_executor(), [self, msg] { self->enqueue(msg); });
            },
            true);
        subscribed_ = true;
        read();
    }

    void enqueue(std::shared_ptr<const std::string> msg) {
        if (closed_) return;
        if (queue_.size() >= kMaxQueued) {
            shutdown();
            return;
        }
        queue_.push_back(std::move(msg));
        if (queue_.size() == 1) write();
    }

    void write() {
        ws_.text(true);
        ws_.async_write(net::buffer(*queue_.front()),
                        beast::bind_front_handler(&StreamSession::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        if (ec) {
            shutdown();
            return;
        }
        queue_.pop_front();
        if (!queue_.empty()) write();
    }

    // Inbound frames are ignored; reading detects the close.
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->shutdown();
                return;
            }
            self->buffer_.consume(self->buffer_.size());
            self->read();
        });
    }

    void shutdown() {
        if (closed_) return;
        closed_ = true;
        queue_.clear();
        if (subscribed_) run_->unsubscribe(token_);
        beast::error_code ignored;
        beast::get_lowest_layer(ws_).socket().close(ignored);
    }

    websocket::stream<beast::tcp_stream> ws_;
    std::shared_ptr<Run> run_;
    beast::flat_buffer buffer_;
    std::deque<std::shared_ptr<const std::string>> queue_;
    int token_ = 0;
    bool subscribed_ = false;
    bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket&& socket, RunManager& runs) : stream_(std::move(socket)), runs_(runs) {}

    void start() {
        net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::read, shared_from_this()));
    }

private:
    void read() {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(60));
        http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            beast::error_code ignored;
            stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
            return;
        }
        if (websocket::is_upgrade(req_)) {
            upgrade();
            return;
        }
        const std::string target(req_.target());
        const HttpReply reply = handle_request(runs_, std::string(req_.method_string()), target, req_.body());
        auto res = std::make_shared<http::response<http::string_body>>(static_cast<http::status>(reply.status),
                                                                        req_.version());
        res->set(http::field::content_type, "application/json");
        res->set(http::field::access_control_allow_origin, "*");
        res->keep_alive(req_.keep_alive());
        res->body() = reply.body.dump();
        res->prepare_payload();
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code wec, std::size_t) {
            if (wec || !res->keep_alive()) {
                beast::error_code ignored;
                self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                return;
            }
            self->read();
        });
    }

    void upgrade() {
        // /runs/{id}/stream
        std::string path(req_.target());
        path = path.substr(0, path.find('?'));
        const std::string prefix = "/runs/", suffix = "/stream";
        std::shared_ptr<Run> run;
        if (path.size() > prefix.size() + suffix.size() && path.compare(0, prefix.size(), prefix) == 0 &&
            path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0) {
            try {
                run = runs_.get(path.substr(prefix.size(), path.size() - prefix.size() - suffix.size()));
            } catch (const NotFoundError&) {
            }
        }
        if (!run) {
            auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found, req_.version());
            res->set(http::field::content_type, "application/json");
            res->body() = R"({"error":"NotFound","message":"no stream at this path"})";
            res->prepare_payload();
            http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
                beast::error_code ignored;
                self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
            });
            return;
        }
        stream_.expires_never();
        std::make_shared<StreamSession>(stream_.release_socket(), std::move(run))->start(std::move(req_));
    }

    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
    RunManager& runs_;
};

}  // namespace

struct GatewayServer::Impl {
    Impl(RunManager& r, const std::string& host, unsigned short port, int threads)
        : runs(r), ioc(threads), acceptor(net::make_strand(ioc)) {
        const tcp::endpoint ep(net::ip::make_address(host), port);
        acceptor.open(ep.protocol());
        acceptor.set_option(net::socket_base::reuse_address(true));
        acceptor.bind(ep);
        acceptor.listen(net::socket_base::max_listen_connections);
        bound_port = acceptor.local_endpoint().port();
        accept();
        for (int i = 0; i < threads; ++i) pool.emplace_back([this] { ioc.run(); });
    }

    void accept() {
        acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) return;  // acceptor closed
            std::make_shared<HttpSession>(std::move(socket), runs)->start();
            accept();
        });
    }

    void stop() {
        if (stopped) return;
        stopped = true;
        net::post(acceptor.get_executor(), [this] {
            beast::error_code ignored;
            acceptor.close(ignored);
        });
        ioc.stop();
        for (auto& t : pool)
            if (t.joinable()) t.join();
    }

    RunManager& runs;
    net::io_context ioc;
    tcp::acceptor acceptor;
    std::vector<std::thread> pool;
    unsigned short bound_port = 0;
    bool stopped = false;
};

GatewayServer::GatewayServer(RunManager& runs, const std::string& host, unsigned short port, int threads)
    : impl_(std::make_unique<Impl>(runs, host, port, threads)) {}

GatewayServer::~GatewayServer() {
    stop();
}

unsigned short GatewayServer::port() const noexcept {
    return impl_->bound_port;
}

void GatewayServer::stop() {
    if (impl_) impl_->stop();
}

}  // namespace etaxi
