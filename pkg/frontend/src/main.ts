import { ServiceClient } from "./api.js";
import { ChatView } from "./chat.js";

declare global {
  interface Window {
    KWAME_SERVICE_URL?: string;
  }
}

const baseUrl = window.KWAME_SERVICE_URL ?? "";
const root = document.getElementById("chat");
if (!root) throw new Error("missing #chat container");

const params = new URLSearchParams(window.location.search);
const lang = params.get("lang");
new ChatView(root, new ServiceClient(baseUrl), {
  k: Number(params.get("k") ?? 3),
  lang: lang === "en" || lang === "fr" ? lang : undefined,
});
