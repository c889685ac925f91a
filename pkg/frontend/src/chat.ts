// Chat thread component: student/assistant bubbles, expandable answer
// cards, vote buttons, and an offline vote queue. All rendering reflects
// the service response verbatim: answers ordered by their rank field,
// scores shown rounded to 2 decimals, never re-ranked client-side.

import { AnswerHit, ApiError, AskOptions, AskReply, ServiceClient, Vote } from "./api.js";

export interface ChatMessage {
  role: "student" | "assistant";
  text: string;
  timestamp: number;
  reply?: AskReply;
}

interface QueuedVote {
  interactionId: string;
  vote: Vote;
  card: HTMLElement;
}

export class ChatView {
  readonly messages: ChatMessage[] = [];
  private thread: HTMLElement;
  private form: HTMLFormElement;
  private input: HTMLInputElement;
  private sendButton: HTMLButtonElement;
  private voteQueue: QueuedVote[] = [];
  private onlineListenerArmed = false;
  private work: Promise<void> = Promise.resolve();

  constructor(
    private root: HTMLElement,
    private client: ServiceClient,
    private options: AskOptions = {},
  ) {
    this.thread = document.createElement("div");
    this.thread.className = "thread";
    this.thread.setAttribute("role", "log");
    this.thread.setAttribute("aria-live", "polite");

    this.form = document.createElement("form");
    this.form.className = "composer";
    this.input = document.createElement("input");
    this.input.type = "text";
    this.input.placeholder = "Ask a question… (tag a lesson with #lesson1)";
    this.input.setAttribute("aria-label", "Question");
    this.sendButton = document.createElement("button");
    this.sendButton.type = "submit";
    this.sendButton.textContent = "Send";
    this.form.append(this.input, this.sendButton);
    this.form.addEventListener("submit", (event) => {
      event.preventDefault();
      const text = this.input.value.trim();
      if (text) this.send(text);
    });

    this.root.append(this.thread, this.form);
  }

  /** Resolves when every in-flight request chain has settled (test hook). */
  whenIdle(): Promise<void> {
    return this.work;
  }

  send(text: string, options: AskOptions = this.options): Promise<void> {
    if (this.input.disabled) return this.work; // one in-flight ask per session
    this.work = this.work.then(() => this.performSend(text, options));
    return this.work;
  }

  private async performSend(text: string, options: AskOptions): Promise<void> {
    this.appendStudent(text);
    this.setBusy(true);
    try {
      const reply = await this.client.ask(text, options);
      this.messages.push({ role: "assistant", text, timestamp: Date.now(), reply });
      this.thread.append(this.renderAssistant(reply));
    } catch (error) {
      this.appendErrorBubble(text, options, error);
    } finally {
      this.setBusy(false);
    }
  }

  private setBusy(busy: boolean): void {
    this.input.disabled = busy;
    this.sendButton.disabled = busy;
  }

  private appendStudent(text: string): void {
    this.messages.push({ role: "student", text, timestamp: Date.now() });
    const bubble = document.createElement("div");
    bubble.className = "msg student";
    bubble.textContent = text;
    this.thread.append(bubble);
  }

  private appendErrorBubble(text: string, options: AskOptions, error: unknown): void {
    const bubble = document.createElement("div");
    bubble.className = "msg error";
    const label = document.createElement("span");
    label.textContent =
      error instanceof ApiError
        ? `The service answered with an error (${error.status}): ${error.message}`
        : "Could not reach the service.";
    const retry = document.createElement("button");
    retry.type = "button";
    retry.className = "retry";
    retry.textContent = "Retry";
    retry.addEventListener("click", () => {
      bubble.remove();
      this.work = this.work.then(() => this.performSend(text, options));
    });
    bubble.append(label, retry);
    this.thread.append(bubble);
  }

  private renderAssistant(reply: AskReply): HTMLElement {
    const bubble = document.createElement("div");
    bubble.className = "msg assistant";

    const badge = document.createElement("span");
    badge.className = "lang-badge";
    badge.textContent = reply.lang_detected.toUpperCase();
    bubble.append(badge);

    if (!reply.answered) {
      const none = document.createElement("div");
      none.className = "no-answer";
      none.textContent = reply.message ?? "no answer";
      const hint = document.createElement("div");
      hint.className = "hint";
      hint.textContent = "Try rephrasing, or tag a lesson (e.g. #lesson1).";
      bubble.append(none, hint);
      return bubble;
    }

    const ordered = [...reply.answers].sort((a, b) => a.rank - b.rank);
    ordered.forEach((answer, i) => {
      bubble.append(this.renderAnswerCard(answer, reply.interaction_id, i === 0));
    });
    return bubble;
  }

  private renderAnswerCard(answer: AnswerHit, interactionId: string, expanded: boolean): HTMLElement {
    const card = document.createElement("details");
    card.className = "answer";
    card.dataset.id = answer.id;
    card.dataset.rank = String(answer.rank);
    if (expanded) card.open = true;

    const summary = document.createElement("summary");
    const rank = document.createElement("span");
    rank.className = "rank";
    rank.textContent = `#${answer.rank}`;
    const id = document.createElement("span");
    id.className = "answer-id";
    id.textContent = answer.id;
    const score = document.createElement("span");
    score.className = "score";
    score.textContent = answer.score.toFixed(2);
    summary.append(rank, id, score);

    const body = document.createElement("div");
    body.className = "answer-body";
    const text = document.createElement("p");
    text.textContent = answer.text;
    body.append(text);
    for (const ref of answer.figure_refs) {
      const chip = document.createElement("span");
      chip.className = "figure-ref";
      chip.textContent = `[${ref}]`;
      body.append(chip);
    }

    body.append(this.renderVoteControls(interactionId, card));
    card.append(summary, body);
    return card;
  }

  private renderVoteControls(interactionId: string, card: HTMLElement): HTMLElement {
    const controls = document.createElement("div");
    controls.className = "votes";
    const status = document.createElement("span");
    status.className = "vote-status";
    for (const vote of ["up", "down"] as Vote[]) {
      const button = document.createElement("button");
      button.type = "button";
      button.className = `vote-${vote}`;
      button.setAttribute("aria-label", `vote ${vote}`);
      button.setAttribute("aria-pressed", "false");
      button.textContent = vote === "up" ? "▲" : "▼";
      button.addEventListener("click", () => {
        this.work = this.work.then(() => this.performVote(interactionId, vote, card));
      });
      controls.append(button);
    }
    controls.append(status);
    return controls;
  }

  private setVoteState(card: HTMLElement, vote: Vote | null, statusText = ""): void {
    for (const kind of ["up", "down"] as Vote[]) {
      const button = card.querySelector<HTMLButtonElement>(`.vote-${kind}`);
      button?.setAttribute("aria-pressed", vote === kind ? "true" : "false");
    }
    const status = card.querySelector<HTMLElement>(".vote-status");
    if (status) status.textContent = statusText;
  }

  private async performVote(interactionId: string, vote: Vote, card: HTMLElement): Promise<void> {
    try {
      await this.client.feedback(interactionId, vote);
      this.setVoteState(card, vote);
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        card.classList.add("expired");
        this.setVoteState(card, null, "session expired");
        return;
      }
      // Network failure: queue the vote and retry once when back online.
      this.voteQueue.push({ interactionId, vote, card });
      this.setVoteState(card, null, "vote queued (offline)");
      this.armOnlineRetry();
    }
  }

  private armOnlineRetry(): void {
    if (this.onlineListenerArmed) return;
    this.onlineListenerArmed = true;
    window.addEventListener(
      "online",
      () => {
        this.onlineListenerArmed = false;
        const queued = this.voteQueue.splice(0);
        for (const item of queued) {
          this.work = this.work.then(() => this.retryQueuedVote(item));
        }
      },
      { once: true },
    );
  }

  private async retryQueuedVote(item: QueuedVote): Promise<void> {
    try {
      await this.client.feedback(item.interactionId, item.vote);
      this.setVoteState(item.card, item.vote);
    } catch {
      this.setVoteState(item.card, null, "vote discarded");
    }
  }
}
