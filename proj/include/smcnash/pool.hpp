#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <mutex>
#include <thread>
#include <vector>

namespace smcnash {

// Fixed-size thread pool. Results are pulled through futures, so callers see
// completions in whatever order they choose and aggregation stays
// order-independent.
class WorkerPool {
public:
    explicit WorkerPool(unsigned workers) {
        if (workers == 0) workers = 1;
        for (unsigned i = 0; i < workers; ++i)
            threads_.emplace_back([this] { worker_loop(); });
    }

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    ~WorkerPool() {
        {
            std::lock_guard<std::mutex> lk(mu_);
            stopping_ = true;
        }
        cv_.notify_all();
        for (std::thread& t : threads_) t.join();
    }

    unsigned size() const { return static_cast<unsigned>(threads_.size()); }

    template <class F>
    auto submit(F&& fn) -> std::future<std::invoke_result_t<F>> {
        using R = std::invoke_result_t<F>;
        auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(fn));
        std::future<R> fut = task->get_future();
        {
            std::lock_guard<std::mutex> lk(mu_);
            queue_.emplace_back([task] { (*task)(); });
        }
        cv_.notify_one();
        return fut;
    }

private:
    void worker_loop() {
        for (;;) {
            std::function<void()> job;
            {
                std::unique_lock<std::mutex> lk(mu_);
                cv_.wait(lk, [this] { return stopping_ || !queue_.empty(); });
                if (queue_.empty()) return;
                job = std::move(queue_.front());
                queue_.pop_front();
            }
            job();
        }
    }

    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::function<void()>> queue_;
    bool stopping_ = false;
    std::vector<std::thread> threads_;
};

// Runs every job on the pool and returns results in submission order. A job
// whose first attempt throws is re-queued once; a second failure is fatal
// and propagates to the caller. Each result is delivered exactly once.
template <class Job, class Fn>
auto schedule(const std::vector<Job>& jobs, WorkerPool& pool, Fn run)
    -> std::vector<std::pair<Job, std::invoke_result_t<Fn, const Job&>>> {
    using R = std::invoke_result_t<Fn, const Job&>;
    std::vector<std::future<R>> futs;
    futs.reserve(jobs.size());
    for (const Job& j : jobs)
        futs.push_back(pool.submit([&run, &j] { return run(j); }));

    std::vector<std::pair<Job, R>> out;
    out.reserve(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        try {
            out.emplace_back(jobs[i], futs[i].get());
        } catch (...) {
            // single retry, then fatal
            auto retry = pool.submit([&run, &jobs, i] { return run(jobs[i]); });
            out.emplace_back(jobs[i], retry.get());
        }
    }
    return out;
}

} // namespace smcnash
