// WebSocket transport for the session bridge (Boost.Beast). One client per
// run; the simulation loop ticks on its own thread, paced against the wall
// clock, and never waits on the network.

#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "yolo/bridge.hpp"

namespace yolo {

namespace websocket = boost::beast::websocket;

struct ServeOptions {
    std::string address{"127.0.0.1"};
    unsigned short port{8765};   // 0 picks a free port
    double speed{1.0};           // simulated seconds per wall-clock second
};

class BridgeServer {
public:
    BridgeServer(ServeOptions opt, SessionSetup setup, ProfileTable table,
                 std::shared_ptr<const TrainedModel> model)
        : opt_(std::move(opt)),
          setup_(std::move(setup)),
          table_(std::move(table)),
          model_(std::move(model)),
          acceptor_(ioc_),
          timer_(ioc_) {
        if (!(opt_.speed > 0) || !std::isfinite(opt_.speed)) throw ConfigError("speed must be > 0");
        if (!model_) model_ = load_model(setup_.model);
        boost::system::error_code ec;
        const auto addr = boost::asio::ip::make_address(opt_.address, ec);
        if (ec) throw ConfigError("bad listen address '" + opt_.address + "'");
        const tcp::endpoint ep(addr, opt_.port);
        acceptor_.open(ep.protocol(), ec);
        if (!ec) acceptor_.bind(ep, ec);
        if (!ec) acceptor_.listen(1, ec);
        if (ec) throw PortInUse("cannot listen on port " + std::to_string(opt_.port) + ": " + ec.message());
    }

    ~BridgeServer() {
        stop_ = true;
        if (sim_.joinable()) sim_.join();
    }

    [[nodiscard]] unsigned short port() const { return acceptor_.local_endpoint().port(); }

    // Serves one client until it disconnects, the arc ends, or stop().
    void run() {
        acceptor_.async_accept([this](boost::system::error_code ec, tcp::socket sock) {
            boost::system::error_code ignored;
            acceptor_.close(ignored);
            if (ec) return;
            ws_.emplace(std::move(sock));
            ws_->text(true);
            ws_->async_accept([this](boost::system::error_code hec) {
                if (hec) return;
                live_.emplace(setup_, table_, model_);
                sim_ = std::thread([this] { simulate(); });
                read();
                pump();
            });
        });
        ioc_.run();
        stop_ = true;
        if (sim_.joinable()) sim_.join();
    }

    // Thread-safe.
    void stop() {
        stop_ = true;
        boost::asio::post(ioc_, [this] {
            boost::system::error_code ec;
            acceptor_.close(ec);
            timer_.cancel();
            if (ws_ && ws_->is_open()) close(websocket::close_code::going_away, "server stopping");
        });
    }

private:
    using tcp = boost::asio::ip::tcp;

    void simulate() {
        using clock = std::chrono::steady_clock;
        const auto start = clock::now();
        const std::chrono::duration<double> period(setup_.sim.tick / opt_.speed);
        std::uint64_t k = 0;
        while (!stop_ && !live_->ended()) {
            ++k;
            std::this_thread::sleep_until(start + std::chrono::duration_cast<clock::duration>(period * k));
            if (stop_) break;
            if (!live_->tick()) break;
        }
        sim_done_ = true;
    }

    void read() {
        ws_->async_read(buffer_, [this](boost::system::error_code ec, std::size_t) {
            if (ec) {
                stop_ = true;
                client_gone_ = true;
                timer_.cancel();
                return;
            }
            const auto text = boost::beast::buffers_to_string(buffer_.data());
            buffer_.consume(buffer_.size());
            try {
                live_->post(text);
            } catch (const ProtocolError& e) {
                stop_ = true;
                live_->fail(e.what());
                return;
            }
            read();
        });
    }

    // Writes one message at a time so a slow client backs up into the
    // bounded outbox rather than into memory here.
    void pump() {
        if (closing_ || client_gone_) return;
        if (auto msg = live_->outbox().try_pop()) {
            const bool last = msg->find("\"kind\":\"error\"") != std::string::npos;
            pending_ = std::move(*msg);
            ws_->async_write(boost::asio::buffer(pending_), [this, last](boost::system::error_code ec, std::size_t) {
                if (ec) {
                    stop_ = true;
                    client_gone_ = true;
                    return;
                }
                if (last) {
                    close(websocket::close_code::policy_error, "protocol error");
                    return;
                }
                pump();
            });
            return;
        }
        if (sim_done_ && live_->outbox().size() == 0) {
            close(websocket::close_code::normal, "session ended");
            return;
        }
        timer_.expires_after(std::chrono::milliseconds(2));
        timer_.async_wait([this](boost::system::error_code ec) {
            if (!ec) pump();
        });
    }

    void close(websocket::close_code code, const char* reason) {
        if (closing_) return;
        closing_ = true;
        stop_ = true;
        timer_.cancel();
        ws_->async_close(websocket::close_reason(code, reason), [](boost::system::error_code) {});
    }

    ServeOptions opt_;
    SessionSetup setup_;
    ProfileTable table_;
    std::shared_ptr<const TrainedModel> model_;

    boost::asio::io_context ioc_;
    tcp::acceptor acceptor_;
    boost::asio::steady_timer timer_;
    std::optional<websocket::stream<tcp::socket>> ws_;
    boost::beast::flat_buffer buffer_;
    std::string pending_;
    bool closing_{false};
    bool client_gone_{false};

    std::optional<LiveSession> live_;
    std::thread sim_;
    std::atomic<bool> stop_{false};
    std::atomic<bool> sim_done_{false};
};

}  // namespace yolo
