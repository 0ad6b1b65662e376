#include "aic3/http_api.hpp"

#include "httplib.h"
#include "json.hpp"

#include "aic3/errors.hpp"

namespace aic3 {
namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, json{{"error", message}});
}

// Maps service exceptions onto HTTP statuses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const ConflictError& e) {
    send_error(res, 409, e.what());
  } catch (const UnavailableError& e) {
    send_error(res, 503, e.what());
  } catch (const NotFoundError& e) {
    send_error(res, 404, e.what());
  } catch (const ExpiredError& e) {
    send_error(res, 410, e.what());
  } catch (const InputError& e) {
    send_error(res, 400, e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, std::string("malformed JSON: ") + e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

json timing_json(Protocol p) {
  const auto t = presentation_timing(p);
  json j{{"window_ms", t.window_ms}};
  if (p == Protocol::btc) {
    j["flicker_period_ms"] = t.flicker_period_ms;
    j["display_ms"] = t.display_ms;
    j["blank_ms"] = t.blank_ms;
  } else {
    j["max_toggle_hz"] = t.max_toggle_hz;
    j["min_toggles"] = t.min_toggles;
  }
  return j;
}

json assignment_json(const Assignment& a) {
  return json{{"assignment_id", a.assignment_id}, {"worker_id", a.worker_id},
              {"batch_ids", a.batch_ids},         {"question_count", a.question_order.size()},
              {"state", to_string(a.state)},      {"expires_at", format_timestamp(a.expires_at_ms)}};
}

}  // namespace

PresentationTiming presentation_timing(Protocol protocol) {
  PresentationTiming t;
  if (protocol == Protocol::ptc) {
    t.flicker_period_ms = 0;
    t.display_ms = 30000;
    t.blank_ms = 0;
    t.window_ms = 30000;
    t.max_toggle_hz = 2.0;
    t.min_toggles = 1;
  }
  return t;
}

StudyServer::StudyServer(StudyService& service, std::filesystem::path stimulus_root)
    : service_(service), store_(std::move(stimulus_root)), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;

  srv.Post("/assignments", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = json::parse(req.body);
      const auto a = service_.open_assignment(body.at("worker_id").get<std::string>());
      send_json(res, 201, assignment_json(a));
    });
  });

  srv.Get(R"(/assignments/([^/]+)/next)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      const auto next = service_.next_question(id);
      if (!next) {
        send_json(res, 200, json{{"assignment_id", id}, {"done", true}});
        return;
      }
      const auto& q = *next->question;
      const bool boosted = q.protocol == Protocol::btc;
      const auto variant = boosted ? StimulusVariant::boosted : StimulusVariant::plain;
      const auto src_variant = boosted ? StimulusVariant::zoomed_src : StimulusVariant::plain;
      const auto source_key = make_key(q.source_id, "", 0);
      send_json(res, 200,
                json{{"assignment_id", id},
                     {"done", false},
                     {"position", next->position},
                     {"total", next->total},
                     {"question_id", q.question_id},
                     {"batch_id", q.batch_id},
                     {"protocol", to_string(q.protocol)},
                     {"stimuli",
                      {{"left", "/stimuli/" + store_.relative_path(q.left, variant)},
                       {"right", "/stimuli/" + store_.relative_path(q.right, variant)},
                       {"source", "/stimuli/" + store_.relative_path(source_key, src_variant)}}},
                     {"timing", timing_json(q.protocol)}});
    });
  });

  srv.Post(R"(/assignments/([^/]+)/responses)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      const auto body = json::parse(req.body);
      ResponseRecord r;
      r.question_id = body.at("question_id").get<std::string>();
      r.answer = parse_answer(body.at("answer").get<std::string>());
      r.response_time_ms = body.at("response_time_ms").get<std::int64_t>();
      r.toggled_count = body.value("toggled_count", 0);
      service_.submit_response(id, r);
      const auto a = service_.assignment(id);
      send_json(res, 201, json{{"status", "recorded"}, {"state", to_string(a.state)}});
    });
  });

  srv.Get("/export.csv", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      res.status = 200;
      res.set_content(service_.export_csv(), "text/csv");
    });
  });

  if (std::filesystem::exists(store_.root())) srv.set_mount_point("/stimuli", store_.root().string());
}

StudyServer::~StudyServer() { stop(); }

bool StudyServer::listen(const std::string& host, int port) { return server_->listen(host, port); }

int StudyServer::bind_to_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool StudyServer::listen_after_bind() { return server_->listen_after_bind(); }

void StudyServer::stop() {
  if (server_) server_->stop();
}

void StudyServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace aic3
