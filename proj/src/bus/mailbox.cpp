#include "lpar/bus/mailbox.hpp"

namespace lpar::bus {

void Mailbox::push(Delivery delivery) {
    {
        std::lock_guard lock(mutex_);
        if (closed_) return;
        queue_.push_back(std::move(delivery));
    }
    ready_.notify_one();
}

std::optional<Delivery> Mailbox::pop() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    auto item = std::move(queue_.front());
    queue_.pop_front();
    return item;
}

std::optional<Delivery> Mailbox::pop_for(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    if (!ready_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; })) return std::nullopt;
    if (queue_.empty()) return std::nullopt;
    auto item = std::move(queue_.front());
    queue_.pop_front();
    return item;
}

std::optional<Delivery> Mailbox::try_pop() {
    std::lock_guard lock(mutex_);
    if (queue_.empty()) return std::nullopt;
    auto item = std::move(queue_.front());
    queue_.pop_front();
    return item;
}

void Mailbox::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    ready_.notify_all();
}

bool Mailbox::closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
}

std::size_t Mailbox::size() const {
    std::lock_guard lock(mutex_);
    return queue_.size();
}

Actor::Actor(std::shared_ptr<Mailbox> mailbox, Handler handler)
    : mailbox_(std::move(mailbox)), handler_(std::move(handler)) {
    thread_ = std::thread([this] {
        while (auto delivery = mailbox_->pop()) {
            handler_(*delivery);
        }
    });
}

Actor::~Actor() { stop(); }

void Actor::stop() {
    mailbox_->close();
    if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();
}

}  // namespace lpar::bus
