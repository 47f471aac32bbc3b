#pragma once

#include <array>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace ecac {

using json = nlohmann::ordered_json;

/// Thrown when an input file cannot be read or is not valid JSON.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a value violates a model invariant; the message names it.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a numerical solve fails beyond tolerance.
struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SessionClass : int { Emergency = 0, GeneralIn = 1, GeneralOut = 2 };

inline constexpr std::array<SessionClass, 3> kSessionClasses = {
    SessionClass::Emergency, SessionClass::GeneralIn, SessionClass::GeneralOut};

inline const char* to_string(SessionClass c) {
    switch (c) {
        case SessionClass::Emergency: return "e";
        case SessionClass::GeneralIn: return "gin";
        case SessionClass::GeneralOut: return "gout";
    }
    return "?";
}

/// On-off voice source shape: talkspurt/silence means, packet spacing and size.
/// All times in seconds, packet_size in bits.
struct VoicePacketParams {
    double talkspurt_mean = 0.352;
    double silent_mean = 0.650;
    double packet_interval = 0.016;
    double packet_size = 1744.0;

    double talkspurt_rate() const { return 1.0 / talkspurt_mean; }
    double silent_rate() const { return 1.0 / silent_mean; }
};

/// Per-class session arrival rates [calls/s] and departure rates [1/s].
struct SessionTrafficParams {
    double arrival_rate_e = 0.0;
    double arrival_rate_gin = 0.0;
    double arrival_rate_gout = 0.0;
    double departure_rate_e = 0.01;
    double departure_rate_gin = 0.01;
    double departure_rate_gout = 0.01;

    double arrival_rate(SessionClass c) const {
        switch (c) {
            case SessionClass::Emergency: return arrival_rate_e;
            case SessionClass::GeneralIn: return arrival_rate_gin;
            case SessionClass::GeneralOut: return arrival_rate_gout;
        }
        return 0.0;
    }
    double departure_rate(SessionClass c) const {
        switch (c) {
            case SessionClass::Emergency: return departure_rate_e;
            case SessionClass::GeneralIn: return departure_rate_gin;
            case SessionClass::GeneralOut: return departure_rate_gout;
        }
        return 0.0;
    }
};

/// Link capacity: session slots, packet queue slots, and bandwidth [bit/s].
struct CapacityParams {
    int max_sessions = 20;
    int queue_capacity = 10;
    double bandwidth = 1.25e6;
};

/// Quality bounds: per-class blocking caps and the average-drop cap.
struct QosBounds {
    double blocking_bound_e = 0.15;
    double blocking_bound_gin = 0.5;
    double drop_bound = 0.0025;
    /// When set, the general-in blocking constraint is checked against
    /// blocking_bound_e instead of blocking_bound_gin.
    bool strict_paper_objective = false;
};

struct TrafficIntensities {
    double rho_e = 0.0;
    double rho_gin = 0.0;
    double rho_gout = 0.0;
};

struct ScenarioConfig {
    VoicePacketParams packet;
    SessionTrafficParams traffic;
    CapacityParams capacity;
    QosBounds qos;

    /// Packet service rate mu = bandwidth / packet_size [pkt/s].
    double packet_service_rate() const { return capacity.bandwidth / packet.packet_size; }

    void validate() const;

    bool operator==(const ScenarioConfig&) const = default;
};

inline bool operator==(const VoicePacketParams& a, const VoicePacketParams& b) {
    return a.talkspurt_mean == b.talkspurt_mean && a.silent_mean == b.silent_mean &&
           a.packet_interval == b.packet_interval && a.packet_size == b.packet_size;
}
inline bool operator==(const SessionTrafficParams& a, const SessionTrafficParams& b) {
    return a.arrival_rate_e == b.arrival_rate_e && a.arrival_rate_gin == b.arrival_rate_gin &&
           a.arrival_rate_gout == b.arrival_rate_gout && a.departure_rate_e == b.departure_rate_e &&
           a.departure_rate_gin == b.departure_rate_gin &&
           a.departure_rate_gout == b.departure_rate_gout;
}
inline bool operator==(const CapacityParams& a, const CapacityParams& b) {
    return a.max_sessions == b.max_sessions && a.queue_capacity == b.queue_capacity &&
           a.bandwidth == b.bandwidth;
}
inline bool operator==(const QosBounds& a, const QosBounds& b) {
    return a.blocking_bound_e == b.blocking_bound_e &&
           a.blocking_bound_gin == b.blocking_bound_gin && a.drop_bound == b.drop_bound &&
           a.strict_paper_objective == b.strict_paper_objective;
}

inline void ScenarioConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw ValidationError(std::string("packet: ") + name + " must be > 0");
    };
    positive(packet.talkspurt_mean, "talkspurt_mean");
    positive(packet.silent_mean, "silent_mean");
    positive(packet.packet_interval, "packet_interval");
    positive(packet.packet_size, "packet_size");

    // alpha*T in (0, 2) keeps the on-off skewness real and the fit denominators nonzero
    const double alpha_t = packet.packet_interval / packet.talkspurt_mean;
    if (!(alpha_t > 0.0 && alpha_t < 2.0))
        throw ValidationError("packet: talkspurt rate * packet_interval out of (0, 2)");

    for (SessionClass c : kSessionClasses) {
        if (traffic.arrival_rate(c) < 0.0)
            throw ValidationError(std::string("traffic: arrival_rate_") + to_string(c) +
                                  " must be >= 0");
        if (!(traffic.departure_rate(c) > 0.0))
            throw ValidationError(std::string("traffic: departure_rate_") + to_string(c) +
                                  " must be > 0");
    }

    if (capacity.max_sessions < 1) throw ValidationError("capacity: max_sessions must be >= 1");
    if (capacity.queue_capacity < 1) throw ValidationError("capacity: queue_capacity must be >= 1");
    if (!(capacity.bandwidth > 0.0)) throw ValidationError("capacity: bandwidth must be > 0");
    if (!(packet_service_rate() > 0.0))
        throw ValidationError("capacity: derived packet service rate must be > 0");

    auto prob = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0))
            throw ValidationError(std::string("qos: ") + name + " must lie in [0, 1]");
    };
    prob(qos.blocking_bound_e, "blocking_bound_e");
    prob(qos.blocking_bound_gin, "blocking_bound_gin");
    prob(qos.drop_bound, "drop_bound");
    if (qos.blocking_bound_e > qos.blocking_bound_gin)
        throw ValidationError("qos: C_e <= C_gin violated");
}

/// rho_c = lambda_c / (N * mu_c) for each class.
inline TrafficIntensities traffic_intensities(const ScenarioConfig& config) {
    const double n = static_cast<double>(config.capacity.max_sessions);
    TrafficIntensities rho;
    rho.rho_e = config.traffic.arrival_rate_e / (n * config.traffic.departure_rate_e);
    rho.rho_gin = config.traffic.arrival_rate_gin / (n * config.traffic.departure_rate_gin);
    rho.rho_gout = config.traffic.arrival_rate_gout / (n * config.traffic.departure_rate_gout);
    return rho;
}

/// Sets a class arrival rate from a target intensity: lambda = rho * N * mu.
inline void set_traffic_intensity(ScenarioConfig& config, SessionClass c, double rho) {
    const double n = static_cast<double>(config.capacity.max_sessions);
    switch (c) {
        case SessionClass::Emergency:
            config.traffic.arrival_rate_e = rho * n * config.traffic.departure_rate_e;
            break;
        case SessionClass::GeneralIn:
            config.traffic.arrival_rate_gin = rho * n * config.traffic.departure_rate_gin;
            break;
        case SessionClass::GeneralOut:
            config.traffic.arrival_rate_gout = rho * n * config.traffic.departure_rate_gout;
            break;
    }
}

namespace detail {

inline double require_number(const json& obj, const char* section, const char* key) {
    if (!obj.contains(key))
        throw ParseError(std::string(section) + ": missing required key '" + key + "'");
    if (!obj.at(key).is_number())
        throw ParseError(std::string(section) + ": key '" + key + "' must be a number");
    return obj.at(key).get<double>();
}

inline double number_or(const json& obj, const char* section, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number())
        throw ParseError(std::string(section) + ": key '" + key + "' must be a number");
    return obj.at(key).get<double>();
}

inline int integer_or(const json& obj, const char* section, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number_integer())
        throw ParseError(std::string(section) + ": key '" + key + "' must be an integer");
    return obj.at(key).get<int>();
}

}  // namespace detail

/// Parses a scenario from a JSON object. Traffic accepts either explicit
/// arrival rates (arrival_rate_e/gin/gout) or intensities (intensity_e/gin/gout,
/// converted via lambda = rho * N * mu). Validates before returning.
inline ScenarioConfig scenario_from_json(const json& root) {
    if (!root.is_object()) throw ParseError("scenario: top level must be a JSON object");
    for (const char* key : {"packet", "traffic", "capacity", "qos"})
        if (!root.contains(key) || !root.at(key).is_object())
            throw ParseError(std::string("scenario: missing section '") + key + "'");

    ScenarioConfig cfg;
    const json& p = root.at("packet");
    cfg.packet.talkspurt_mean = detail::require_number(p, "packet", "talkspurt_mean");
    cfg.packet.silent_mean = detail::require_number(p, "packet", "silent_mean");
    cfg.packet.packet_interval = detail::require_number(p, "packet", "packet_interval");
    cfg.packet.packet_size = detail::require_number(p, "packet", "packet_size");

    const json& cap = root.at("capacity");
    cfg.capacity.max_sessions = detail::integer_or(cap, "capacity", "max_sessions", 20);
    cfg.capacity.queue_capacity = detail::integer_or(cap, "capacity", "queue_capacity", 10);
    cfg.capacity.bandwidth = detail::require_number(cap, "capacity", "bandwidth");

    const json& t = root.at("traffic");
    cfg.traffic.departure_rate_e = detail::require_number(t, "traffic", "departure_rate_e");
    cfg.traffic.departure_rate_gin = detail::require_number(t, "traffic", "departure_rate_gin");
    cfg.traffic.departure_rate_gout = detail::require_number(t, "traffic", "departure_rate_gout");

    const bool has_rates = t.contains("arrival_rate_e") || t.contains("arrival_rate_gin") ||
                           t.contains("arrival_rate_gout");
    const bool has_intensities =
        t.contains("intensity_e") || t.contains("intensity_gin") || t.contains("intensity_gout");
    if (has_rates && has_intensities)
        throw ParseError("traffic: specify either arrival_rate_* or intensity_*, not both");
    if (!has_rates && !has_intensities)
        throw ParseError("traffic: specify arrival_rate_* or intensity_* for each class");
    if (has_rates) {
        cfg.traffic.arrival_rate_e = detail::require_number(t, "traffic", "arrival_rate_e");
        cfg.traffic.arrival_rate_gin = detail::require_number(t, "traffic", "arrival_rate_gin");
        cfg.traffic.arrival_rate_gout = detail::require_number(t, "traffic", "arrival_rate_gout");
    } else {
        set_traffic_intensity(cfg, SessionClass::Emergency,
                              detail::require_number(t, "traffic", "intensity_e"));
        set_traffic_intensity(cfg, SessionClass::GeneralIn,
                              detail::require_number(t, "traffic", "intensity_gin"));
        set_traffic_intensity(cfg, SessionClass::GeneralOut,
                              detail::require_number(t, "traffic", "intensity_gout"));
    }

    const json& q = root.at("qos");
    cfg.qos.blocking_bound_e = detail::require_number(q, "qos", "blocking_bound_e");
    cfg.qos.blocking_bound_gin = detail::number_or(q, "qos", "blocking_bound_gin", 0.5);
    cfg.qos.drop_bound = detail::require_number(q, "qos", "drop_bound");
    if (q.contains("strict_paper_objective")) {
        if (!q.at("strict_paper_objective").is_boolean())
            throw ParseError("qos: key 'strict_paper_objective' must be a boolean");
        cfg.qos.strict_paper_objective = q.at("strict_paper_objective").get<bool>();
    }

    cfg.validate();
    return cfg;
}

/// Canonical JSON form: always explicit arrival rates and all defaults spelled out.
inline json scenario_to_json(const ScenarioConfig& cfg) {
    json root;
    root["packet"] = {{"talkspurt_mean", cfg.packet.talkspurt_mean},
                      {"silent_mean", cfg.packet.silent_mean},
                      {"packet_interval", cfg.packet.packet_interval},
                      {"packet_size", cfg.packet.packet_size}};
    root["traffic"] = {{"arrival_rate_e", cfg.traffic.arrival_rate_e},
                       {"arrival_rate_gin", cfg.traffic.arrival_rate_gin},
                       {"arrival_rate_gout", cfg.traffic.arrival_rate_gout},
                       {"departure_rate_e", cfg.traffic.departure_rate_e},
                       {"departure_rate_gin", cfg.traffic.departure_rate_gin},
                       {"departure_rate_gout", cfg.traffic.departure_rate_gout}};
    root["capacity"] = {{"max_sessions", cfg.capacity.max_sessions},
                        {"queue_capacity", cfg.capacity.queue_capacity},
                        {"bandwidth", cfg.capacity.bandwidth}};
    root["qos"] = {{"blocking_bound_e", cfg.qos.blocking_bound_e},
                   {"blocking_bound_gin", cfg.qos.blocking_bound_gin},
                   {"drop_bound", cfg.qos.drop_bound},
                   {"strict_paper_objective", cfg.qos.strict_paper_objective}};
    return root;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path);
    json root;
    try {
        root = json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("scenario file " + path + " is not valid JSON: " + e.what());
    }
    return scenario_from_json(root);
}

}  // namespace ecac
