// Wire types for the policy service. Everything here mirrors what the HTTP
// endpoints actually send; the client never invents fields of its own.
export {};
