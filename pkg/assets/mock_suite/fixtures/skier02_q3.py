def answer_question(video, possible_answers):
    activity = video.video_query("What is the person doing?")
    context = {"activity": activity}
    answer = video.choose_option("why is the skier wearing goggles?", context, possible_answers)
    return answer
