import { ArenaApi } from "./api";
import { ArenaApp } from "./app";

// API base: ?api=http://host:port beats the injected global, which beats
// same-origin (the vite dev server proxies /session and /battle there).
const params = new URLSearchParams(window.location.search);
const base =
  params.get("api") ??
  (window as { ARENA_API_BASE?: string }).ARENA_API_BASE ??
  "";

const app = new ArenaApp(new ArenaApi(base));
void app.boot();
