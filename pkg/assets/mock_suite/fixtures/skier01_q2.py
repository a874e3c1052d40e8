def answer_question(video, possible_answers):
    hits = video.filter_object("skier")
    if hits.num_frames == 0:
        return "no"
    return "yes"
