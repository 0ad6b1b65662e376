#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "aic3/service.hpp"
#include "aic3/stimulus_prep.hpp"

namespace httplib {
class Server;
}

namespace aic3 {

// Timing parameters the browser client needs for each protocol.
struct PresentationTiming {
  int flicker_period_ms = 100;
  int display_ms = 8000;
  int blank_ms = 3000;
  int window_ms = 11000;
  double max_toggle_hz = 0.0;
  int min_toggles = 0;
};
PresentationTiming presentation_timing(Protocol protocol);

// Routes:
//   POST /assignments                  {"worker_id"}
//   GET  /assignments/{id}/next
//   POST /assignments/{id}/responses   {"question_id","answer","response_time_ms","toggled_count"}
//   GET  /export.csv
//   GET  /stimuli/...                  static PNGs from the stimulus store
class StudyServer {
 public:
  StudyServer(StudyService& service, std::filesystem::path stimulus_root);
  ~StudyServer();

  // Blocking.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it; then call listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  StudyService& service_;
  StimulusStore store_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace aic3
