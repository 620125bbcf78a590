#include "footlab/app/service.h"

#include "footlab/app/commands.h"
#include "footlab/error.h"
#include "footlab/image_io.h"

#include <httplib.h>

#include <atomic>
#include <condition_variable>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace footlab::app {

using nlohmann::json;

namespace {

struct HttpError {
    int status;
    std::string code;
    std::string message;
};

int status_for(ErrorCode c)
{
    switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::SchemaError:
    case ErrorCode::DecodeError:
    case ErrorCode::UnsupportedFormat:
    case ErrorCode::SpecInvalid:
    case ErrorCode::EmptyInput:
    case ErrorCode::ProfileParseError:
        return 400;
    default:
        return 422;  // well-formed request the pipeline could not satisfy
    }
}

json error_body(const std::string& code, const std::string& message)
{
    return {{"error", code}, {"message", message}};
}

void send(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req)
{
    try {
        json j = json::parse(req.body);
        if (!j.is_object()) {
            throw HttpError{400, "SchemaError", "request body must be a JSON object"};
        }
        return j;
    } catch (const json::exception& e) {
        throw HttpError{400, "SchemaError", std::string("malformed JSON: ") + e.what()};
    }
}

template <typename T>
T take(json& j, const char* key, bool required = true)
{
    const auto it = j.find(key);
    if (it == j.end()) {
        if (required) {
            throw HttpError{400, "SchemaError", std::string("'") + key + "': required"};
        }
        return T{};
    }
    try {
        T v = it->get<T>();
        j.erase(it);
        return v;
    } catch (const json::exception&) {
        throw HttpError{400, "SchemaError", std::string("'") + key + "': wrong type"};
    }
}

struct Job {
    std::mutex mu;
    std::condition_variable cv;
    bool done = false;
    double progress = 0.0;
    int status = 200;
    json body;
};

}  // namespace

struct Service::Impl {
    httplib::Server server;
    std::chrono::milliseconds budget;
    std::thread listener;

    std::mutex mu;  // guards everything below
    SessionConfig config;
    std::uint64_t config_version = 1;
    std::optional<calib::CalibrationProfile> profile;
    std::map<std::string, std::shared_ptr<const GrayImage>> images;
    std::map<std::string, std::shared_ptr<const std::vector<std::uint8_t>>> masks;
    std::map<std::string, std::shared_ptr<Job>> jobs;
    std::uint64_t next_id = 1;
    std::vector<std::thread> workers;

    Impl(SessionConfig c, std::chrono::milliseconds b) : budget(b), config(std::move(c)) { routes(); }

    std::string new_id(const char* prefix)
    {
        return std::string(prefix) + "-" + std::to_string(next_id++);
    }

    std::shared_ptr<const GrayImage> image(const std::string& id)
    {
        std::lock_guard lock(mu);
        const auto it = images.find(id);
        if (it == images.end()) {
            throw HttpError{404, "NotFound", "unknown image id '" + id + "'"};
        }
        return it->second;
    }

    SessionConfig session()
    {
        std::lock_guard lock(mu);
        return config;
    }

    calib::CalibrationProfile current_profile(const SessionConfig& cfg)
    {
        {
            std::lock_guard lock(mu);
            if (profile) {
                return *profile;
            }
        }
        if (cfg.profile_path.empty()) {
            throw Error(ErrorCode::CalibrationMissing, "no calibration: POST /calibrate or set 'profile' in /config");
        }
        return calib::load_profile(cfg.profile_path);
    }

    /// Runs `work` on a worker; answers inline if it finishes within the budget,
    /// otherwise with 202 and a job id to poll.
    void run_or_defer(httplib::Response& res, std::function<json(const soit::ProgressFn&)> work)
    {
        auto job = std::make_shared<Job>();
        std::string id;
        {
            std::lock_guard lock(mu);
            id = new_id("job");
            jobs[id] = job;
            workers.emplace_back([job, work = std::move(work)] {
                int status = 200;
                json body;
                try {
                    body = work([job](double p) {
                        std::lock_guard l(job->mu);
                        job->progress = p;
                    });
                } catch (const HttpError& e) {
                    status = e.status;
                    body = error_body(e.code, e.message);
                } catch (const Error& e) {
                    status = status_for(e.code());
                    body = error_body(std::string(to_string(e.code())), e.what());
                } catch (const std::exception& e) {
                    status = 500;
                    body = error_body("Internal", e.what());
                }
                std::lock_guard l(job->mu);
                job->status = status;
                job->body = std::move(body);
                job->progress = 1.0;
                job->done = true;
                job->cv.notify_all();
            });
        }
        std::unique_lock l(job->mu);
        if (job->cv.wait_for(l, budget, [&] { return job->done; })) {
            send(res, job->status, job->body);
            return;
        }
        send(res, 202, {{"job_id", id}, {"status", "running"}, {"progress", job->progress}, {"poll", "/jobs/" + id}});
    }

    json threshold_result(const ThresholdOutcome& o)
    {
        const auto png = std::make_shared<const std::vector<std::uint8_t>>(encode_png(o.mask));
        std::string mask_id;
        {
            std::lock_guard lock(mu);
            mask_id = new_id("mask");
            masks[mask_id] = png;
        }
        json j = {{"method", o.method},
                  {"threshold", o.threshold},
                  {"z", o.score.z},
                  {"nac_fraction", o.score.nac_fraction},
                  {"feasible", o.score.feasible},
                  {"report", to_json(o.score)},
                  {"mask_id", mask_id},
                  {"mask_url", "/masks/" + mask_id}};
        if (o.criterion) {
            j["criterion"] = *o.criterion;
        }
        json curve = json::array();
        for (const auto& r : o.curve) {
            curve.push_back({{"threshold", r.threshold},
                             {"z", r.z},
                             {"nac_fraction", r.nac_fraction},
                             {"feasible", r.feasible}});
        }
        j["curve"] = std::move(curve);
        return j;
    }

    template <typename F>
    void guarded(httplib::Response& res, F&& f)
    {
        try {
            f();
        } catch (const HttpError& e) {
            send(res, e.status, error_body(e.code, e.message));
        } catch (const Error& e) {
            send(res, status_for(e.code()), error_body(std::string(to_string(e.code())), e.what()));
        } catch (const std::exception& e) {
            send(res, 500, error_body("Internal", e.what()));
        }
    }

    void routes()
    {
        server.set_payload_max_length(64u << 20);

        server.Post("/images", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto* p = reinterpret_cast<const std::uint8_t*>(req.body.data());
                auto img = std::make_shared<const GrayImage>(load_gray({p, req.body.size()}));
                std::string id;
                {
                    std::lock_guard lock(mu);
                    id = new_id("img");
                    images[id] = img;
                }
                send(res, 201, {{"id", id}, {"width", img->width()}, {"height", img->height()}});
            });
        });

        server.Post("/threshold", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                json body = parse_body(req);
                const auto img = image(take<std::string>(body, "image_id"));
                const SessionConfig cfg = session();
                ThresholdRequest tr;
                tr.method = body.contains("method") ? take<std::string>(body, "method") : std::string("soit");
                tr.classical = cfg.classical;
                if (const auto it = body.find("classical"); it != body.end()) {
                    tr.classical = config_from_json({{"classical", *it}}, cfg).classical;
                    body.erase(it);
                }
                tr.search = search_from_json(body, cfg.search());
                run_or_defer(res, [this, img, tr](const soit::ProgressFn& progress) {
                    return threshold_result(run_threshold(*img, tr, progress));
                });
            });
        });

        server.Post("/measure", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                json body = parse_body(req);
                const auto img = image(take<std::string>(body, "image_id"));
                SessionConfig cfg = session();
                if (const auto it = body.find("config"); it != body.end()) {
                    cfg = config_from_json(*it, cfg);
                    body.erase(it);
                }
                if (!body.empty()) {
                    throw HttpError{400, "SchemaError", "'" + body.begin().key() + "': unknown key"};
                }
                const auto profile = current_profile(cfg);
                run_or_defer(res, [img, cfg, profile](const soit::ProgressFn&) {
                    return to_json(measure::measure_foot(*img, profile, cfg.measure), true);
                });
            });
        });

        server.Post("/batch", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                json body = parse_body(req);
                const auto ids = take<std::vector<std::string>>(body, "image_ids");
                SessionConfig cfg = session();
                if (const auto it = body.find("config"); it != body.end()) {
                    cfg = config_from_json(*it, cfg);
                    body.erase(it);
                }
                if (!body.empty()) {
                    throw HttpError{400, "SchemaError", "'" + body.begin().key() + "': unknown key"};
                }
                if (ids.empty()) {
                    throw HttpError{400, "EmptyInput", "'image_ids' is empty"};
                }
                const auto profile = current_profile(cfg);
                run_or_defer(res, [this, ids, cfg, profile](const soit::ProgressFn&) {
                    const auto items = run_batch(ids, profile, cfg.measure, 0, [this](const std::string& id) {
                        std::lock_guard lock(mu);
                        const auto it = images.find(id);
                        if (it == images.end()) {
                            throw Error(ErrorCode::InvalidArgument, "unknown image id '" + id + "'");
                        }
                        return *it->second;
                    });
                    std::ostringstream csv;
                    write_measure_csv(csv, items);
                    json out = batch_sidecar(items, !cfg.no_plots);
                    out["csv"] = csv.str();
                    std::size_t failures = 0;
                    for (const auto& item : items) {
                        failures += item.result ? 0 : 1;
                    }
                    out["failures"] = failures;
                    return out;
                });
            });
        });

        server.Post("/calibrate", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                json body = parse_body(req);
                const auto raw = take<json>(body, "observations");
                const auto fit_date = body.contains("fit_date") ? take<std::string>(body, "fit_date") : "";
                const bool apply = body.contains("apply") ? take<bool>(body, "apply") : true;
                if (!body.empty()) {
                    throw HttpError{400, "SchemaError", "'" + body.begin().key() + "': unknown key"};
                }
                if (!raw.is_array()) {
                    throw HttpError{400, "SchemaError", "'observations': expected an array"};
                }
                std::vector<std::pair<calib::View, calib::ScaleObservation>> obs;
                for (std::size_t i = 0; i < raw.size(); ++i) {
                    const auto& o = raw[i];
                    const std::string where = "observations[" + std::to_string(i) + "]";
                    if (!o.is_object() || !o.contains("view") || !o.contains("distance_px") ||
                        !o.contains("px_per_cm") || !o["view"].is_string() || !o["distance_px"].is_number() ||
                        !o["px_per_cm"].is_number()) {
                        throw HttpError{400, "SchemaError", where + ": needs view, distance_px, px_per_cm"};
                    }
                    const auto view = calib::parse_view(o["view"].get<std::string>());
                    if (!view) {
                        throw HttpError{400, "SchemaError", where + ".view: expected side or under"};
                    }
                    obs.emplace_back(*view,
                                     calib::ScaleObservation{o["distance_px"].get<double>(), o["px_per_cm"].get<double>()});
                }
                const auto profile = calibrate(obs, fit_date);
                if (apply) {
                    std::lock_guard lock(mu);
                    this->profile = profile;
                }
                json out = {{"profile", calib::format_profile(profile)}, {"applied", apply}};
                for (auto v : {calib::View::Side, calib::View::Under}) {
                    const auto& cal = v == calib::View::Side ? profile.side : profile.under;
                    if (cal) {
                        out[std::string(calib::name(v))] = {{"slope", cal->function.slope},
                                                            {"intercept", cal->function.intercept}};
                    }
                }
                send(res, 200, out);
            });
        });

        server.Get("/config", [this](const httplib::Request&, httplib::Response& res) {
            std::lock_guard lock(mu);
            send(res, 200, {{"version", config_version}, {"config", to_json(config)}});
        });

        server.Put("/config", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                json body = parse_body(req);
                const auto version = take<std::uint64_t>(body, "version");
                const auto patch = take<json>(body, "config");
                if (!body.empty()) {
                    throw HttpError{400, "SchemaError", "'" + body.begin().key() + "': unknown key"};
                }
                std::lock_guard lock(mu);
                if (version != config_version) {
                    throw HttpError{409, "Conflict",
                                    "config version " + std::to_string(version) + " is stale (current " +
                                        std::to_string(config_version) + ")"};
                }
                config = config_from_json(patch, config);
                ++config_version;
                send(res, 200, {{"version", config_version}, {"config", to_json(config)}});
            });
        });

        server.Get(R"(/jobs/([A-Za-z0-9-]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                std::shared_ptr<Job> job;
                {
                    std::lock_guard lock(mu);
                    const auto it = jobs.find(req.matches[1]);
                    if (it == jobs.end()) {
                        throw HttpError{404, "NotFound", "unknown job id '" + std::string(req.matches[1]) + "'"};
                    }
                    job = it->second;
                }
                std::lock_guard l(job->mu);
                json out = {{"job_id", std::string(req.matches[1])},
                            {"status", !job->done ? "running" : job->status == 200 ? "done" : "failed"},
                            {"progress", job->progress}};
                if (job->done) {
                    out["http_status"] = job->status;
                    out[job->status == 200 ? "result" : "error"] = job->body;
                }
                send(res, 200, out);
            });
        });

        server.Get(R"(/masks/([A-Za-z0-9-]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                std::lock_guard lock(mu);
                const auto it = masks.find(req.matches[1]);
                if (it == masks.end()) {
                    throw HttpError{404, "NotFound", "unknown mask id '" + std::string(req.matches[1]) + "'"};
                }
                res.set_content(std::string(it->second->begin(), it->second->end()), "image/png");
            });
        });
    }
};

Service::Service(SessionConfig config, std::chrono::milliseconds sync_budget)
{
    config.validate();
    impl_ = std::make_unique<Impl>(std::move(config), sync_budget);
}

Service::~Service()
{
    stop();
}

int Service::bind(const std::string& host, int port)
{
    if (port == 0) {
        return impl_->server.bind_to_any_port(host);
    }
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::start()
{
    impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void Service::stop()
{
    if (!impl_) {
        return;
    }
    impl_->server.stop();
    if (impl_->listener.joinable()) {
        impl_->listener.join();
    }
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(impl_->mu);
        workers.swap(impl_->workers);
    }
    for (auto& w : workers) {
        w.join();
    }
}

}  // namespace footlab::app
