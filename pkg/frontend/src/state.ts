// Client view state: a replica of the server session built purely from the
// event feed (or a full snapshot on resync). The client never computes ppm,
// bubble styles, or physics; it stores what the server sent.

import type {
  AvatarPayload,
  BubblePayload,
  DevicePayload,
  EventRecord,
  HeatmapPayload,
  HeightLayer,
  ReadingPayload,
  RoomPayload,
  SessionSnapshot,
} from "./types.js";

export interface ViewState {
  sessionId: string | null;
  scenario: string;
  mode: string;
  status: string;
  ended: boolean;
  clock: number;
  targetPpm: number;
  room: RoomPayload | null;
  avatar: AvatarPayload;
  devices: Map<string, DevicePayload>;
  bubbles: Map<string, BubblePayload>;
  readings: Map<string, ReadingPayload>;
  lastSeq: number;
  completed: boolean;
  completedT: number | null;
  selectedHeight: HeightLayer;
  heatmap: HeatmapPayload | null;
  needsResync: boolean;
  faults: string[];
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    scenario: "",
    mode: "ar_bubbles",
    status: "running",
    ended: false,
    clock: 0,
    targetPpm: 800,
    room: null,
    avatar: { pos: [0, 0], target: null },
    devices: new Map(),
    bubbles: new Map(),
    readings: new Map(),
    lastSeq: 0,
    completed: false,
    completedT: null,
    selectedHeight: "T",
    heatmap: null,
    needsResync: false,
    faults: [],
  };
}

/** Rebuild everything from a full snapshot (initial join or gap recovery). */
export function applySnapshot(state: ViewState, snap: SessionSnapshot): void {
  state.sessionId = snap.session_id;
  state.scenario = snap.scenario;
  state.mode = snap.mode;
  state.status = snap.status;
  state.ended = snap.ended;
  state.clock = snap.t;
  state.room = snap.room;
  state.avatar = snap.avatar;
  state.devices = new Map(snap.devices.map((d) => [d.id, d]));
  state.bubbles = new Map(snap.bubbles.map((b) => [b.id, b]));
  state.readings = new Map(Object.entries(snap.readings));
  state.lastSeq = snap.seq;
  state.completed = snap.completion.complete;
  state.completedT = snap.completion.completed_t;
  state.targetPpm = snap.completion.target_ppm;
  state.needsResync = false;
}

/**
 * Apply an ordered batch of events. A sequence gap flags needsResync and
 * stops; the caller refetches the snapshot.
 */
export function applyEvents(state: ViewState, events: EventRecord[]): void {
  for (const event of events) {
    if (event.seq <= state.lastSeq) continue; // replayed duplicates are fine
    if (event.seq !== state.lastSeq + 1) {
      state.needsResync = true;
      return;
    }
    applyOne(state, event);
    state.lastSeq = event.seq;
    state.clock = Math.max(state.clock, event.t);
  }
}

function applyOne(state: ViewState, event: EventRecord): void {
  const p = event.payload as Record<string, any>;
  switch (event.kind) {
    case "session_start":
      state.sessionId = p.session_id;
      state.scenario = p.scenario;
      state.mode = p.mode;
      state.room = p.room;
      state.targetPpm = p.target_ppm;
      break;
    case "avatar":
      state.avatar = { pos: p.pos, target: p.target };
      break;
    case "reading":
      state.readings.set(p.device_id, p as ReadingPayload);
      break;
    case "bubble": {
      if (p.op === "removed") {
        state.bubbles.delete(p.id);
        break;
      }
      const { op, ...bubble } = p;
      state.bubbles.set(bubble.id, bubble as BubblePayload);
      break;
    }
    case "device_state":
      state.devices.set(p.id, p as DevicePayload);
      break;
    case "completion":
      state.completed = true;
      state.completedT = p.completed_t;
      state.status = "complete";
      break;
    case "session_end":
      state.ended = true;
      state.status = p.status;
      break;
    case "fault":
      state.faults.push(String(p.error));
      break;
    default:
      break; // forward compatibility: unknown kinds are ignored
  }
}

/** The wearable's latest reading, if any (ar mode). */
export function wearableReading(state: ViewState): ReadingPayload | undefined {
  return state.readings.get("wearable-0");
}
